use super::tables::{df_critical_values, mackinnon_p, PBound};
use super::{newey_west, TrendSpec, UnitRootReport, UnitRootTest};
use crate::error::{Error, Result};
use crate::linalg;

/// floor(4 (N/100)^(2/9)).
pub fn default_bandwidth(n: usize) -> usize {
    (4.0 * (n as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize
}

/// Phillips–Perron Z_tau test: the Dickey–Fuller t-ratio from an AR(1)
/// regression, corrected with a Bartlett long-run variance of the residuals.
pub fn pp_test(x: &[f64], trend: TrendSpec, bandwidth: Option<usize>) -> Result<UnitRootReport> {
    let n_all = x.len();
    if n_all < 25 {
        return Err(Error::SampleSize(format!(
            "Phillips-Perron needs at least 25 observations, got {n_all}"
        )));
    }
    let bandwidth = bandwidth.unwrap_or_else(|| default_bandwidth(n_all));
    if bandwidth >= n_all {
        return Err(Error::InvalidArgument(format!(
            "bandwidth {bandwidth} must be below the sample size {n_all}"
        )));
    }
    let y = &x[1..];
    let n = y.len();
    let mut cols = vec![x[..n].to_vec()];
    cols.extend(trend.columns(n));
    let fit = linalg::ols(y, &cols)?;
    let k = cols.len();
    let u = &fit.residuals;
    let lam2 = newey_west(u, bandwidth);
    let lam = lam2.sqrt();
    let s2 = fit.ssr / (n - k) as f64;
    let s = s2.sqrt();
    let gamma0 = fit.ssr / n as f64;
    let se = fit.std_error(0);
    let tau = (fit.beta[0] - 1.0) / se;
    let stat = (gamma0 / lam2).sqrt() * tau - 0.5 * ((lam2 - gamma0) / lam) * (n as f64 * se / s);
    Ok(UnitRootReport::new(
        UnitRootTest::PhillipsPerron,
        stat,
        (mackinnon_p(stat, trend), PBound::Exact),
        bandwidth,
        trend,
        n,
        df_critical_values(trend),
    ))
}
