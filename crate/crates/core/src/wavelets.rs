//! Non-decimated (à trous) Haar decomposition into dyadic scales.
//!
//! Level j smooths the previous level with the two-tap Haar filter spread by
//! 2^(j-1) samples; the detail is the difference between consecutive levels.
//! The filter is causal, so only the start of the series needs a boundary
//! rule, and smooth + sum of details reproduces the input exactly.

use std::io::Write;

use crate::error::{Error, Result};

pub const DEFAULT_LEVELS: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Half-sample symmetric reflection: x[-1] = x[0], x[-2] = x[1], ...
    #[default]
    Reflect,
    Periodic,
}

impl Boundary {
    fn index(self, i: isize, n: usize) -> usize {
        let n = n as isize;
        match self {
            Boundary::Periodic => i.rem_euclid(n) as usize,
            Boundary::Reflect => {
                let m = i.rem_euclid(2 * n);
                (if m < n { m } else { 2 * n - 1 - m }) as usize
            }
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Boundary::Reflect => "reflect",
            Boundary::Periodic => "periodic",
        }
    }
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reflect" => Ok(Boundary::Reflect),
            "periodic" => Ok(Boundary::Periodic),
            other => Err(Error::InvalidArgument(format!("unknown boundary `{other}`"))),
        }
    }
}

/// Detail series d_1..d_J plus the final smooth, all full length.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleDecomposition {
    details: Vec<Vec<f64>>,
    smooth: Vec<f64>,
    boundary: Boundary,
}

impl ScaleDecomposition {
    pub fn levels(&self) -> usize {
        self.details.len()
    }

    pub fn len(&self) -> usize {
        self.smooth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.smooth.is_empty()
    }

    /// Detail at scale `j` (1-based).
    pub fn detail(&self, j: usize) -> &[f64] {
        &self.details[j - 1]
    }

    pub fn details(&self) -> &[Vec<f64>] {
        &self.details
    }

    pub fn details_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.details
    }

    pub fn smooth(&self) -> &[f64] {
        &self.smooth
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// N rows with columns d1..dJ,smooth.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let header: Vec<String> = (1..=self.levels())
            .map(|j| format!("d{j}"))
            .chain(std::iter::once("smooth".to_string()))
            .collect();
        writeln!(w, "{}", header.join(","))?;
        for t in 0..self.len() {
            let row: Vec<String> = self
                .details
                .iter()
                .map(|d| d[t].to_string())
                .chain(std::iter::once(self.smooth[t].to_string()))
                .collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Period band in weeks covered by scale `j`: [2^j, 2^(j+1)).
pub fn scale_band(j: usize) -> (usize, usize) {
    (1 << j, 1 << (j + 1))
}

pub fn haar_atrous_decompose(x: &[f64], levels: usize) -> Result<ScaleDecomposition> {
    haar_atrous_decompose_with(x, levels, Boundary::Reflect)
}

pub fn haar_atrous_decompose_with(
    x: &[f64],
    levels: usize,
    boundary: Boundary,
) -> Result<ScaleDecomposition> {
    let n = x.len();
    if levels == 0 {
        return Err(Error::InvalidArgument("need at least one level".into()));
    }
    if levels >= usize::BITS as usize || n < (1usize << levels) {
        let max = if n == 0 { 0 } else { n.ilog2() };
        return Err(Error::InvalidArgument(format!(
            "{levels} levels need at least 2^{levels} observations; with {n} the maximum is {max}"
        )));
    }
    let mut prev = x.to_vec();
    let mut details = Vec::with_capacity(levels);
    for j in 1..=levels {
        let hole = 1isize << (j - 1);
        let next: Vec<f64> = (0..n)
            .map(|t| {
                let back = boundary.index(t as isize - hole, n);
                0.5 * (prev[t] + prev[back])
            })
            .collect();
        details.push(prev.iter().zip(&next).map(|(a, b)| a - b).collect());
        prev = next;
    }
    Ok(ScaleDecomposition {
        details,
        smooth: prev,
        boundary,
    })
}

/// smooth + sum of details.
pub fn reconstruct(d: &ScaleDecomposition) -> Vec<f64> {
    let mut out = d.smooth.clone();
    for detail in &d.details {
        out.iter_mut().zip(detail).for_each(|(o, v)| *o += v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedTree;
    use rand_distr::{Distribution, StandardNormal};

    fn noise(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = SeedTree::new(seed).rng();
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn constant_series_has_no_detail() {
        let d = haar_atrous_decompose(&[5.0; 16], 3).unwrap();
        assert!(d.details().iter().flatten().all(|v| *v == 0.0));
        assert!(d.smooth().iter().all(|v| *v == 5.0));
    }

    #[test]
    fn too_many_levels_names_maximum() {
        let err = haar_atrous_decompose(&[1.0; 100], 7).unwrap_err();
        assert!(err.to_string().contains("maximum is 6"), "{err}");
        assert!(haar_atrous_decompose(&[1.0; 128], 7).is_ok());
        assert!(haar_atrous_decompose(&[1.0; 8], 0).is_err());
    }

    #[test]
    fn zero_input_reconstructs_to_zero() {
        let d = haar_atrous_decompose(&[0.0; 64], 4).unwrap();
        assert!(reconstruct(&d).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn boundary_indices() {
        assert_eq!(Boundary::Reflect.index(-1, 5), 0);
        assert_eq!(Boundary::Reflect.index(-3, 5), 2);
        assert_eq!(Boundary::Reflect.index(-7, 5), 3);
        assert_eq!(Boundary::Periodic.index(-1, 5), 4);
        assert_eq!(Boundary::Periodic.index(-6, 5), 4);
    }

    #[test]
    fn periodic_boundary_round_trips() {
        let x = noise(3, 256);
        let d = haar_atrous_decompose_with(&x, 6, Boundary::Periodic).unwrap();
        let r = reconstruct(&d);
        assert!(x.iter().zip(&r).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn csv_layout() {
        let d = haar_atrous_decompose(&[1.0, 2.0, 3.0, 4.0], 2).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "d1,d2,smooth");
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[1].split(',').count(), 3);
    }
}
