//! Johansen trace test with an unrestricted constant (linear trend in the
//! levels), and the portfolio series implied by a cointegrating vector.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::ingest::AlignedPanel;
use crate::linalg::residualize;
use crate::unitroot::Level;

/// Trace critical values indexed by the number of common trends K - r
/// (1, 2, 3), ordered 10%, 5%, 1%.
const TRACE_CRITICAL: [[f64; 3]; 3] = [
    [6.50, 8.18, 11.65],
    [15.66, 17.95, 23.52],
    [28.71, 31.52, 37.22],
];

/// Trace critical values for hypothesis r <= `rank` in a `k`-variable system.
pub fn trace_critical_values(k: usize, rank: usize) -> Result<[(Level, f64); 3]> {
    let trends = k.checked_sub(rank).filter(|t| (1..=3).contains(t)).ok_or_else(|| {
        Error::Unsupported(format!(
            "trace critical values are tabulated for 1 to 3 common trends, not {k} - {rank}"
        ))
    })?;
    let v = TRACE_CRITICAL[trends - 1];
    Ok([(Level::Ten, v[0]), (Level::Five, v[1]), (Level::One, v[2])])
}

#[derive(Debug, Clone, PartialEq)]
pub struct JohansenReport {
    pub names: Vec<String>,
    /// Descending, each in [0, 1).
    pub eigenvalues: Vec<f64>,
    /// `trace_stats[k]` tests the hypothesis r <= k.
    pub trace_stats: Vec<f64>,
    pub critical_values: Vec<[(Level, f64); 3]>,
    /// Cointegrating vectors as columns (`eigenvectors[j]` pairs with
    /// `eigenvalues[j]`), each scaled so its first entry is 1.
    pub eigenvectors: Vec<Vec<f64>>,
    pub lag_order: usize,
    pub nobs: usize,
}

impl JohansenReport {
    pub fn rejects(&self, rank: usize, level: Level) -> bool {
        let cv = self.critical_values[rank]
            .iter()
            .find(|(l, _)| *l == level)
            .map(|(_, v)| *v)
            .expect("all levels tabulated");
        self.trace_stats[rank] > cv
    }

    /// Smallest r whose hypothesis is not rejected at `level`.
    pub fn selected_rank(&self, level: Level) -> usize {
        (0..self.trace_stats.len())
            .find(|&r| !self.rejects(r, level))
            .unwrap_or(self.trace_stats.len())
    }
}

/// Johansen trace test on the panel columns. `lag_order` is the VAR order in
/// levels, so the error-correction form carries `lag_order - 1` lagged
/// differences.
pub fn johansen_trace(panel: &AlignedPanel, lag_order: usize) -> Result<JohansenReport> {
    let k = panel.n_cols();
    let n = panel.n_rows();
    if k < 2 {
        return Err(Error::InvalidArgument("Johansen needs at least 2 series".into()));
    }
    if lag_order < 1 {
        return Err(Error::InvalidArgument("lag order must be at least 1".into()));
    }
    if n <= k * lag_order + 10 {
        return Err(Error::SampleSize(format!(
            "{n} rows for {k} series at lag order {lag_order}"
        )));
    }
    let critical_values = (0..k)
        .map(|r| trace_critical_values(k, r))
        .collect::<Result<Vec<_>>>()?;

    let x = |t: usize, j: usize| panel.column_at(j)[t];
    let dx = |t: usize, j: usize| x(t, j) - x(t - 1, j);
    let t0 = lag_order;
    let nobs = n - t0;
    let z0 = DMatrix::from_fn(nobs, k, |i, j| dx(t0 + i, j));
    let z1 = DMatrix::from_fn(nobs, k, |i, j| x(t0 + i - 1, j));
    let n_short = (lag_order - 1) * k;
    let z2 = DMatrix::from_fn(nobs, n_short + 1, |i, c| {
        if c == n_short {
            1.0
        } else {
            dx(t0 + i - 1 - c / k, c % k)
        }
    });
    let r0 = residualize(&z0, &z2).map_err(rank_error)?;
    let r1 = residualize(&z1, &z2).map_err(rank_error)?;
    let tf = nobs as f64;
    let s00 = r0.tr_mul(&r0) / tf;
    let s01 = r0.tr_mul(&r1) / tf;
    let s11 = r1.tr_mul(&r1) / tf;

    let s00_chol = s00
        .cholesky()
        .ok_or_else(|| Error::NumericalRank("residual moment matrix S00 is singular".into()))?;
    let l = s11
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NumericalRank("residual moment matrix S11 is singular".into()))?
        .l();
    let m = s01.transpose() * s00_chol.solve(&s01);
    // C = L^-1 M L^-T, symmetric
    let linv_m = l
        .solve_lower_triangular(&m)
        .ok_or_else(|| Error::NumericalRank("whitening failed".into()))?;
    let c = l
        .solve_lower_triangular(&linv_m.transpose())
        .ok_or_else(|| Error::NumericalRank("whitening failed".into()))?;
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order
        .iter()
        .map(|&i| eig.eigenvalues[i].clamp(0.0, 1.0 - f64::EPSILON))
        .collect();
    let lt = l.transpose();
    let eigenvectors = order
        .iter()
        .map(|&i| {
            let beta = lt
                .solve_upper_triangular(&eig.eigenvectors.column(i).into_owned())
                .expect("triangular factor is nonsingular");
            let head = beta[0];
            beta.iter().map(|v| v / head).collect()
        })
        .collect();
    let trace_stats = (0..k)
        .map(|r| -tf * eigenvalues[r..].iter().map(|l| (1.0 - l).ln()).sum::<f64>())
        .collect();
    Ok(JohansenReport {
        names: panel.names().to_vec(),
        eigenvalues,
        trace_stats,
        critical_values,
        eigenvectors,
        lag_order,
        nobs,
    })
}

fn rank_error(e: Error) -> Error {
    match e {
        Error::SingularDesign(m) => Error::NumericalRank(m),
        other => other,
    }
}

/// s_t = sum_j w_j x_jt.
pub fn portfolio_series(panel: &AlignedPanel, weights: &[f64]) -> Result<Vec<f64>> {
    if weights.len() != panel.n_cols() {
        return Err(Error::InvalidArgument(format!(
            "{} weights for {} columns",
            weights.len(),
            panel.n_cols()
        )));
    }
    Ok((0..panel.n_rows())
        .map(|t| {
            weights
                .iter()
                .zip(panel.columns())
                .map(|(w, c)| w * c[t])
                .sum()
        })
        .collect())
}
