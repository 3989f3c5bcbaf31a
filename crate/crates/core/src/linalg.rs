//! Least-squares helpers shared by every regression in the crate. All fits go
//! through a Householder QR; level series reach 1e4 and the normal equations
//! would square the condition number.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative threshold on |R_ii| / ||column_i|| below which a column is treated
/// as linearly dependent on the ones before it.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub(crate) struct OlsFit {
    pub beta: Vec<f64>,
    pub residuals: Vec<f64>,
    pub ssr: f64,
    /// (X'X)^-1, to be scaled by the residual variance.
    pub unscaled_cov: DMatrix<f64>,
}

impl OlsFit {
    pub fn nobs(&self) -> usize {
        self.residuals.len()
    }

    pub fn df_resid(&self) -> usize {
        self.nobs() - self.beta.len()
    }

    pub fn sigma2(&self) -> f64 {
        self.ssr / self.df_resid() as f64
    }

    pub fn std_error(&self, i: usize) -> f64 {
        (self.sigma2() * self.unscaled_cov[(i, i)]).sqrt()
    }
}

pub(crate) fn design(columns: &[Vec<f64>]) -> DMatrix<f64> {
    let n = columns.first().map_or(0, Vec::len);
    DMatrix::from_fn(n, columns.len(), |i, j| columns[j][i])
}

/// Ordinary least squares of `y` on the given columns. Fails on a
/// rank-deficient design.
pub(crate) fn ols(y: &[f64], columns: &[Vec<f64>]) -> Result<OlsFit> {
    let n = y.len();
    let k = columns.len();
    if columns.iter().any(|c| c.len() != n) {
        return Err(Error::InvalidArgument("regressor length mismatch".into()));
    }
    if n <= k {
        return Err(Error::SampleSize(format!(
            "{n} observations for {k} regressors"
        )));
    }
    let x = design(columns);
    let qr = x.clone().qr();
    let r = qr.r();
    check_rank(&x, &r)?;
    let mut qty = DVector::from_column_slice(y);
    qr.q_tr_mul(&mut qty);
    let rk = r.view((0, 0), (k, k)).into_owned();
    let beta = rk
        .solve_upper_triangular(&qty.rows(0, k).into_owned())
        .ok_or_else(|| Error::SingularDesign("triangular solve failed".into()))?;
    let fitted = &x * &beta;
    let residuals: Vec<f64> = y.iter().zip(fitted.iter()).map(|(a, b)| a - b).collect();
    let ssr = residuals.iter().map(|e| e * e).sum();
    let rinv = rk
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or_else(|| Error::SingularDesign("triangular inverse failed".into()))?;
    let unscaled_cov = &rinv * rinv.transpose();
    Ok(OlsFit {
        beta: beta.iter().copied().collect(),
        residuals,
        ssr,
        unscaled_cov,
    })
}

fn check_rank(x: &DMatrix<f64>, r: &DMatrix<f64>) -> Result<()> {
    for j in 0..x.ncols() {
        let norm = x.column(j).norm();
        if norm == 0.0 || r[(j, j)].abs() <= RANK_TOL * norm {
            return Err(Error::SingularDesign(format!(
                "column {j} is linearly dependent on earlier columns"
            )));
        }
    }
    Ok(())
}

/// Residuals of every column of `ys` regressed on `x` (multi-response OLS).
pub(crate) fn residualize(ys: &DMatrix<f64>, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if x.ncols() == 0 {
        return Ok(ys.clone());
    }
    let qr = x.clone().qr();
    let r = qr.r();
    check_rank(x, &r)?;
    let k = x.ncols();
    let mut qty = ys.clone();
    qr.q_tr_mul(&mut qty);
    let coef = r
        .view((0, 0), (k, k))
        .into_owned()
        .solve_upper_triangular(&qty.rows(0, k).into_owned())
        .ok_or_else(|| Error::SingularDesign("triangular solve failed".into()))?;
    Ok(ys - x * coef)
}

/// Sum of squared residuals and numerical rank of a least-squares fit that
/// silently skips columns already spanned by earlier ones.
pub(crate) fn ssr_rank_tolerant(y: &[f64], columns: &[Vec<f64>]) -> (f64, usize) {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(columns.len());
    for col in columns {
        let norm0 = dot(col, col).sqrt();
        if norm0 == 0.0 {
            continue;
        }
        let mut v = col.clone();
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &v);
                v.iter_mut().zip(q).for_each(|(vi, qi)| *vi -= c * qi);
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm > RANK_TOL * 1e2 * norm0 {
            v.iter_mut().for_each(|vi| *vi /= norm);
            basis.push(v);
        }
    }
    let mut r = y.to_vec();
    for _ in 0..2 {
        for q in &basis {
            let c = dot(q, &r);
            r.iter_mut().zip(q).for_each(|(ri, qi)| *ri -= c * qi);
        }
    }
    (dot(&r, &r), basis.len())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_recovered() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 + 2.0 * v).collect();
        let fit = ols(&y, &[vec![1.0; 10], x]).unwrap();
        assert!((fit.beta[0] - 3.0).abs() < 1e-12);
        assert!((fit.beta[1] - 2.0).abs() < 1e-12);
        assert!(fit.ssr < 1e-20);
    }

    #[test]
    fn collinear_design_rejected() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let x2: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let y = x.clone();
        assert!(matches!(
            ols(&y, &[vec![1.0; 10], x, x2]),
            Err(Error::SingularDesign(_))
        ));
    }

    #[test]
    fn rank_tolerant_skips_duplicates() {
        let x: Vec<f64> = (0..20).map(|v| ((v * 7) % 11) as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| v * v).collect();
        let (ssr1, r1) = ssr_rank_tolerant(&y, &[vec![1.0; 20], x.clone()]);
        let (ssr2, r2) = ssr_rank_tolerant(&y, &[vec![1.0; 20], x.clone(), x]);
        assert_eq!(r1, 2);
        assert_eq!(r2, 2);
        assert!((ssr1 - ssr2).abs() < 1e-8 * ssr1);
    }
}
