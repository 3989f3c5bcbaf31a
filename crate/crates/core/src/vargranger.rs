//! Vector autoregressions and pairwise Granger-causality F-tests, applied to
//! raw series and to wavelet detail series scale by scale.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, ols};
use crate::special::f_sf;
use crate::wavelets::{scale_band, ScaleDecomposition};

pub const DEFAULT_GRANGER_LAGS: usize = 3;

/// Legend printed under every significance-coded table.
pub const SIGNIF_LEGEND: &str = "Signif. codes:  0 ‘***’ 0.001 ‘**’ 0.01 ‘*’ 0.05 ‘.’ 0.1 ‘ ’ 1";

pub fn signif_code(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else if p < 0.1 {
        "."
    } else {
        " "
    }
}

/// Reduced-form VAR(p) with an intercept in every equation.
#[derive(Debug, Clone)]
pub struct VarFit {
    pub lag_order: usize,
    /// Per-equation intercepts.
    pub intercept: Vec<f64>,
    /// A_1..A_p; entry (i, k) of A_l multiplies series k at lag l in equation i.
    pub coefficients: Vec<DMatrix<f64>>,
    /// Residuals per equation, each of length N - p.
    pub residuals: Vec<Vec<f64>>,
    /// Residual covariance with the per-equation degrees-of-freedom correction.
    pub sigma: DMatrix<f64>,
    pub nobs: usize,
}

fn lagged(x: &[f64], lag: usize, start: usize) -> Vec<f64> {
    x[start - lag..x.len() - lag].to_vec()
}

fn check_lengths(series: &[&[f64]], lag_order: usize) -> Result<usize> {
    if series.is_empty() {
        return Err(Error::InvalidArgument("no series given".into()));
    }
    if lag_order == 0 {
        return Err(Error::InvalidArgument("lag order must be at least 1".into()));
    }
    let n = series[0].len();
    if series.iter().any(|s| s.len() != n) {
        return Err(Error::InvalidArgument("series lengths differ".into()));
    }
    let k = series.len().max(2);
    if n <= k * lag_order + 5 {
        return Err(Error::SampleSize(format!(
            "{n} observations for {} series at lag {lag_order}; need more than {}",
            series.len(),
            k * lag_order + 5
        )));
    }
    Ok(n)
}

fn var_regressors(series: &[&[f64]], lag_order: usize, start: usize) -> Vec<Vec<f64>> {
    let t = series[0].len() - start;
    let mut cols = vec![vec![1.0; t]];
    for lag in 1..=lag_order {
        cols.extend(series.iter().map(|s| lagged(s, lag, start)));
    }
    cols
}

pub fn var_fit(series: &[&[f64]], lag_order: usize) -> Result<VarFit> {
    let n = check_lengths(series, lag_order)?;
    let k = series.len();
    let cols = var_regressors(series, lag_order, lag_order);
    let mut intercept = Vec::with_capacity(k);
    let mut coefficients = vec![DMatrix::zeros(k, k); lag_order];
    let mut residuals = Vec::with_capacity(k);
    for (i, s) in series.iter().enumerate() {
        let fit = ols(&s[lag_order..], &cols).map_err(|e| match e {
            Error::SingularDesign(m) => Error::NumericalRank(format!("equation {i}: {m}")),
            other => other,
        })?;
        intercept.push(fit.beta[0]);
        for (l, a) in coefficients.iter_mut().enumerate() {
            for j in 0..k {
                a[(i, j)] = fit.beta[1 + l * k + j];
            }
        }
        residuals.push(fit.residuals);
    }
    let nobs = n - lag_order;
    let df = (nobs - cols.len()) as f64;
    let sigma = DMatrix::from_fn(k, k, |a, b| linalg::dot(&residuals[a], &residuals[b]) / df);
    Ok(VarFit {
        lag_order,
        intercept,
        coefficients,
        residuals,
        sigma,
        nobs,
    })
}

/// Lag in 1..=max_lag minimising AIC = ln det(Σ_ml) + 2 K (K p + 1) / T, with
/// every candidate fitted on the same sample.
pub fn select_var_lag(series: &[&[f64]], max_lag: usize) -> Result<usize> {
    check_lengths(series, max_lag)?;
    let k = series.len();
    let t = series[0].len() - max_lag;
    let mut best = (f64::INFINITY, 1);
    for p in 1..=max_lag {
        let cols = var_regressors(series, p, max_lag);
        let resid: Vec<Vec<f64>> = series
            .iter()
            .map(|s| ols(&s[max_lag..], &cols).map(|f| f.residuals))
            .collect::<Result<_>>()?;
        let sigma = DMatrix::from_fn(k, k, |a, b| linalg::dot(&resid[a], &resid[b]) / t as f64);
        let det = sigma.determinant();
        if det <= 0.0 {
            return Err(Error::NumericalRank(format!(
                "residual covariance singular at lag {p}"
            )));
        }
        let aic = det.ln() + 2.0 * (k * (k * p + 1)) as f64 / t as f64;
        if aic < best.0 {
            best = (aic, p);
        }
    }
    Ok(best.1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrangerReport {
    pub dependent: String,
    pub independent: String,
    pub lag_order: usize,
    pub f_statistic: f64,
    pub p_value: f64,
    pub df_num: usize,
    pub df_den: usize,
    pub ssr_restricted: f64,
    pub ssr_unrestricted: f64,
}

impl GrangerReport {
    pub fn signif(&self) -> &'static str {
        signif_code(self.p_value)
    }
}

/// Does `x` Granger-cause `y`? Compares y on its own p lags against y on its
/// own lags plus p lags of x, both with an intercept, over the N - p usable
/// observations.
///
/// Collinear lag sets (for instance x equal to y) are not an error: the test
/// then uses the numerical ranks of the two designs, and reports F = 0, p = 1
/// when x adds nothing. A perfect unrestricted fit gives F = inf, p = 0.
pub fn granger_test(y: &[f64], x: &[f64], lag_order: usize) -> Result<GrangerReport> {
    granger_test_named(y, x, lag_order, "y", "x")
}

pub fn granger_test_named(
    y: &[f64],
    x: &[f64],
    lag_order: usize,
    dependent: &str,
    independent: &str,
) -> Result<GrangerReport> {
    check_lengths(&[y, x], lag_order)?;
    for (name, s) in [(dependent, y), (independent, x)] {
        let first = s[0];
        if s.iter().all(|v| *v == first) {
            return Err(Error::NumericalRank(format!("{name} is constant")));
        }
        if s.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation(format!("{name} has non-finite values")));
        }
    }
    let p = lag_order;
    let target = &y[p..];
    let mut restricted = vec![vec![1.0; target.len()]];
    restricted.extend((1..=p).map(|l| lagged(y, l, p)));
    let mut unrestricted = restricted.clone();
    unrestricted.extend((1..=p).map(|l| lagged(x, l, p)));

    let (ssr_r, rank_r) = linalg::ssr_rank_tolerant(target, &restricted);
    let (ssr_u, rank_u) = linalg::ssr_rank_tolerant(target, &unrestricted);
    let ssr_u = ssr_u.min(ssr_r);
    let q = rank_u - rank_r;
    let df = target.len() - rank_u;

    let m = linalg::mean(target);
    let tss: f64 = target.iter().map(|v| (v - m).powi(2)).sum();
    let tiny = 1e-20 * tss.max(f64::MIN_POSITIVE);
    let (f, pv) = if q == 0 || ssr_r <= tiny {
        (0.0, 1.0)
    } else if ssr_u <= tiny {
        (f64::INFINITY, 0.0)
    } else {
        let f = ((ssr_r - ssr_u) / q as f64) / (ssr_u / df as f64);
        (f, f_sf(f, q as f64, df as f64))
    };
    Ok(GrangerReport {
        dependent: dependent.to_string(),
        independent: independent.to_string(),
        lag_order,
        f_statistic: f,
        p_value: pv,
        df_num: q,
        df_den: df,
        ssr_restricted: ssr_r,
        ssr_unrestricted: ssr_u,
    })
}

/// Granger tests for one wavelet scale, both directions of every pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleGrangerTable {
    pub scale: usize,
    /// Period band in weeks, [lo, hi).
    pub band: (usize, usize),
    pub reports: Vec<GrangerReport>,
}

impl ScaleGrangerTable {
    pub fn band_label(&self) -> String {
        format!("{}-{} weeks", self.band.0, self.band.1)
    }

    pub fn get(&self, dependent: &str, independent: &str) -> Option<&GrangerReport> {
        self.reports
            .iter()
            .find(|r| r.dependent == dependent && r.independent == independent)
    }
}

/// For each scale j = 1..J and each pair (a, b), tests a → b and b → a on the
/// detail series d_j.
pub fn scale_granger_matrix(
    decompositions: &[(String, ScaleDecomposition)],
    pairs: &[(String, String)],
    lag_order: usize,
) -> Result<Vec<ScaleGrangerTable>> {
    let Some((_, first)) = decompositions.first() else {
        return Err(Error::InvalidArgument("no decompositions given".into()));
    };
    let levels = first.levels();
    for (name, d) in decompositions {
        if d.levels() != levels || d.len() != first.len() {
            return Err(Error::InvalidArgument(format!(
                "decomposition `{name}` has {} levels and {} rows; expected {levels} and {}",
                d.levels(),
                d.len(),
                first.len()
            )));
        }
    }
    let find = |name: &str| {
        decompositions
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, d)| d)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    };
    let mut directions = Vec::with_capacity(2 * pairs.len());
    for (a, b) in pairs {
        let (da, db) = (find(a)?, find(b)?);
        directions.push((a.as_str(), da, b.as_str(), db));
        directions.push((b.as_str(), db, a.as_str(), da));
    }
    let cells: Vec<(usize, usize)> = (1..=levels)
        .flat_map(|j| (0..directions.len()).map(move |k| (j, k)))
        .collect();
    let reports: Vec<GrangerReport> = cells
        .par_iter()
        .map(|&(j, k)| {
            let (dep, dd, ind, di) = directions[k];
            granger_test_named(dd.detail(j), di.detail(j), lag_order, dep, ind)
        })
        .collect::<Result<_>>()?;
    let mut reports = reports.into_iter();
    Ok((1..=levels)
        .map(|j| ScaleGrangerTable {
            scale: j,
            band: scale_band(j),
            reports: reports.by_ref().take(directions.len()).collect(),
        })
        .collect())
}
