use super::tables::{df_critical_values, mackinnon_p, PBound};
use super::{TrendSpec, UnitRootReport, UnitRootTest};
use crate::error::{Error, Result};
use crate::ingest::diff;
use crate::linalg::{self, OlsFit};

/// Schwert's rule: floor(12 (N/100)^(1/4)).
pub fn default_adf_max_lags(n: usize) -> usize {
    (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

// Regression of dy_t on deterministic terms, y_{t-1} and `lags` lagged
// differences, over observations t = start..dy.len(). Returns the fit and
// the column index of y_{t-1}.
fn adf_regression(x: &[f64], trend: TrendSpec, lags: usize, start: usize) -> Result<(OlsFit, usize)> {
    let dy = diff(x);
    let n = dy.len() - start;
    let mut cols = trend.columns(n);
    let level_col = cols.len();
    cols.push((start..dy.len()).map(|t| x[t]).collect());
    for i in 1..=lags {
        cols.push((start..dy.len()).map(|t| dy[t - i]).collect());
    }
    let fit = linalg::ols(&dy[start..], &cols)?;
    Ok((fit, level_col))
}

fn check_size(n: usize, max_lags: usize) -> Result<()> {
    if n < 20 + max_lags {
        return Err(Error::SampleSize(format!(
            "ADF needs at least {} observations, got {n}",
            20 + max_lags
        )));
    }
    Ok(())
}

fn report(x: &[f64], trend: TrendSpec, lags: usize) -> Result<UnitRootReport> {
    let (fit, col) = adf_regression(x, trend, lags, lags)?;
    let stat = fit.beta[col] / fit.std_error(col);
    Ok(UnitRootReport::new(
        UnitRootTest::Adf,
        stat,
        (mackinnon_p(stat, trend), PBound::Exact),
        lags,
        trend,
        fit.nobs(),
        df_critical_values(trend),
    ))
}

/// Augmented Dickey–Fuller test with the augmentation order chosen by AIC
/// over 0..=max_lags on a common sample, then refit on the full sample.
pub fn adf_test(x: &[f64], trend: TrendSpec, max_lags: Option<usize>) -> Result<UnitRootReport> {
    let max_lags = max_lags.unwrap_or_else(|| default_adf_max_lags(x.len()));
    check_size(x.len(), max_lags)?;
    let mut best = (f64::INFINITY, 0);
    for lags in 0..=max_lags {
        let (fit, _) = adf_regression(x, trend, lags, max_lags)?;
        let n = fit.nobs() as f64;
        let aic = n * (fit.ssr / n).ln() + 2.0 * fit.beta.len() as f64;
        if aic < best.0 {
            best = (aic, lags);
        }
    }
    report(x, trend, best.1)
}

/// Augmented Dickey–Fuller test with a pinned augmentation order.
pub fn adf_test_fixed_lags(x: &[f64], trend: TrendSpec, lags: usize) -> Result<UnitRootReport> {
    check_size(x.len(), lags)?;
    report(x, trend, lags)
}
