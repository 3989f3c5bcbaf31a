use super::tables::{kpss_critical_values, kpss_p};
use super::{default_bandwidth, newey_west, TrendSpec, UnitRootReport, UnitRootTest};
use crate::error::{Error, Result};
use crate::linalg;

/// KPSS stationarity test: squared partial sums of the demeaned (or
/// detrended) series over the long-run variance. Right-tail rejection.
pub fn kpss_test(x: &[f64], trend: TrendSpec, bandwidth: Option<usize>) -> Result<UnitRootReport> {
    let Some(cv) = kpss_critical_values(trend) else {
        return Err(Error::Unsupported(
            "KPSS requires a constant or constant-and-linear trend".into(),
        ));
    };
    let n = x.len();
    if n < 25 {
        return Err(Error::SampleSize(format!("KPSS needs at least 25 observations, got {n}")));
    }
    let bandwidth = bandwidth.unwrap_or_else(|| default_bandwidth(n));
    if bandwidth >= n {
        return Err(Error::InvalidArgument(format!(
            "bandwidth {bandwidth} must be below the sample size {n}"
        )));
    }
    let resid = linalg::ols(x, &trend.columns(n))?.residuals;
    let partial_sq: f64 = resid
        .iter()
        .scan(0.0, |s, e| {
            *s += e;
            Some(*s * *s)
        })
        .sum();
    let lam2 = newey_west(&resid, bandwidth);
    let stat = partial_sq / (n as f64 * n as f64) / lam2;
    Ok(UnitRootReport::new(
        UnitRootTest::Kpss,
        stat,
        kpss_p(stat, trend),
        bandwidth,
        trend,
        n,
        cv,
    ))
}
