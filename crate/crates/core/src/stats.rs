//! Covariance, correlation, OLS with an ANOVA summary, and Durbin–Watson.

use crate::error::{Error, Result};
use crate::ingest::AlignedPanel;
use crate::linalg::{self, mean};
use crate::special::{f_sf, t_two_sided};

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::InvalidArgument("need at least 2 observations".into()));
    }
    Ok(())
}

/// Sample covariance with the n-1 denominator.
pub fn covariance(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    let (mx, my) = (mean(x), mean(y));
    let s: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    Ok(s / (x.len() - 1) as f64)
}

/// Pearson correlation, clamped to [-1, 1].
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    let sxy = covariance(x, y)?;
    let sxx = covariance(x, x)?;
    let syy = covariance(y, y)?;
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(Error::UndefinedCorrelation("constant input".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Correlation of one unordered column pair inside a window; `None` when a
/// column is constant there.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCorrelation {
    pub first: String,
    pub second: String,
    pub r: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowCorrelation {
    /// Half-open row range actually used (end capped at the panel length).
    pub start: usize,
    pub end: usize,
    pub pairs: Vec<PairCorrelation>,
}

impl WindowCorrelation {
    /// Correlation of a pair in either order.
    pub fn get(&self, a: &str, b: &str) -> Result<f64> {
        let pair = self
            .pairs
            .iter()
            .find(|p| (p.first == a && p.second == b) || (p.first == b && p.second == a))
            .ok_or_else(|| Error::UnknownColumn(format!("{a}/{b}")))?;
        pair.r.ok_or_else(|| {
            Error::UndefinedCorrelation(format!(
                "{a}/{b} in rows {}..{}: constant column",
                self.start, self.end
            ))
        })
    }
}

/// Pairwise correlations of every column pair over each half-open row window.
pub fn windowed_correlations(
    panel: &AlignedPanel,
    windows: &[(usize, usize)],
) -> Result<Vec<WindowCorrelation>> {
    let n = panel.n_rows();
    windows
        .iter()
        .map(|&(start, end)| {
            let end_c = end.min(n);
            if start >= end || start >= n || end_c - start < 2 {
                return Err(Error::InvalidArgument(format!(
                    "window {start}..{end} is empty or outside {n} rows"
                )));
            }
            let names = panel.names();
            let mut pairs = Vec::new();
            for i in 0..names.len() {
                for j in i + 1..names.len() {
                    let x = &panel.column_at(i)[start..end_c];
                    let y = &panel.column_at(j)[start..end_c];
                    let r = match pearson(x, y) {
                        Ok(r) => Some(r),
                        Err(Error::UndefinedCorrelation(_)) => None,
                        Err(e) => return Err(e),
                    };
                    pairs.push(PairCorrelation {
                        first: names[i].clone(),
                        second: names[j].clone(),
                        r,
                    });
                }
            }
            Ok(WindowCorrelation {
                start,
                end: end_c,
                pairs,
            })
        })
        .collect()
}

/// Least-squares fit with intercept plus its ANOVA summary.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionReport {
    pub intercept: f64,
    pub slopes: Vec<f64>,
    /// Standard errors, intercept first.
    pub std_errors: Vec<f64>,
    pub t_values: Vec<f64>,
    pub t_p_values: Vec<f64>,
    pub residuals: Vec<f64>,
    pub nobs: usize,
    pub df_model: usize,
    pub df_resid: usize,
    pub ssr: f64,
    pub ess: f64,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub f_statistic: f64,
    pub f_p_value: f64,
    /// `None` when the fit is exact and the statistic is undefined.
    pub durbin_watson: Option<f64>,
}

impl RegressionReport {
    /// Slope of a single-regressor fit.
    pub fn slope(&self) -> f64 {
        self.slopes[0]
    }
}

/// OLS of `y` on an intercept and the given regressors.
pub fn ols_anova(y: &[f64], regressors: &[&[f64]]) -> Result<RegressionReport> {
    let n = y.len();
    let k = regressors.len();
    if k == 0 {
        return Err(Error::InvalidArgument("no regressors".into()));
    }
    if regressors.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidArgument("regressor length mismatch".into()));
    }
    if n <= k + 1 {
        return Err(Error::SampleSize(format!("{n} observations for {k} regressors")));
    }
    let mut cols = vec![vec![1.0; n]];
    cols.extend(regressors.iter().map(|r| r.to_vec()));
    let fit = linalg::ols(y, &cols)?;

    let my = mean(y);
    let tss: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let ssr = fit.ssr;
    let ess = (tss - ssr).max(0.0);
    let df_resid = n - k - 1;
    let perfect = ssr <= 1e-24 * tss.max(f64::MIN_POSITIVE);
    let r_squared = if tss > 0.0 { (1.0 - ssr / tss).clamp(0.0, 1.0) } else { 0.0 };
    let adj_r_squared = 1.0 - (1.0 - r_squared) * (n - 1) as f64 / df_resid as f64;
    let (f_statistic, f_p_value) = if perfect {
        (f64::INFINITY, 0.0)
    } else {
        let f = (ess / k as f64) / (ssr / df_resid as f64);
        (f, f_sf(f, k as f64, df_resid as f64))
    };
    let std_errors: Vec<f64> = (0..=k).map(|i| fit.std_error(i)).collect();
    let t_values: Vec<f64> = fit
        .beta
        .iter()
        .zip(&std_errors)
        .map(|(b, s)| if *s > 0.0 { b / s } else { f64::INFINITY.copysign(*b) })
        .collect();
    let t_p_values = t_values
        .iter()
        .map(|t| t_two_sided(*t, df_resid as f64))
        .collect();
    let durbin_watson = if perfect { None } else { durbin_watson(&fit.residuals).ok() };
    Ok(RegressionReport {
        intercept: fit.beta[0],
        slopes: fit.beta[1..].to_vec(),
        std_errors,
        t_values,
        t_p_values,
        residuals: fit.residuals,
        nobs: n,
        df_model: k,
        df_resid,
        ssr,
        ess,
        r_squared,
        adj_r_squared,
        f_statistic,
        f_p_value,
        durbin_watson,
    })
}

/// Durbin–Watson statistic of a residual series.
pub fn durbin_watson(residuals: &[f64]) -> Result<f64> {
    if residuals.len() < 2 {
        return Err(Error::InvalidArgument("need at least 2 residuals".into()));
    }
    let den: f64 = residuals.iter().map(|e| e * e).sum();
    if den == 0.0 {
        return Err(Error::InvalidArgument(
            "Durbin-Watson undefined for all-zero residuals".into(),
        ));
    }
    let num: f64 = residuals.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn noise(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn covariance_basics() {
        assert_eq!(covariance(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert_eq!(covariance(&[1.0, 5.0, 3.0], &[2.0, 2.0, 2.0]).unwrap(), 0.0);
        assert!(covariance(&[1.0], &[1.0]).is_err());
        assert!(covariance(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn pearson_self_and_negation() {
        let x = noise(1, 40);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &x).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&x, &neg).unwrap() + 1.0).abs() < 1e-15);
        assert!(matches!(
            pearson(&x, &vec![3.0; 40]),
            Err(Error::UndefinedCorrelation(_))
        ));
    }

    #[test]
    fn window_with_constant_column() {
        let p = AlignedPanel::weekly(vec![
            ("a".into(), vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]),
            ("b".into(), vec![1.0, 1.0, 1.0, 4.0, 2.0, 6.0]),
        ])
        .unwrap();
        let w = windowed_correlations(&p, &[(0, 3), (0, 100)]).unwrap();
        assert!(matches!(w[0].get("a", "b"), Err(Error::UndefinedCorrelation(_))));
        assert_eq!(w[1].end, 6);
        let full = pearson(p.column("a").unwrap(), p.column("b").unwrap()).unwrap();
        assert_eq!(w[1].get("b", "a").unwrap(), full);
        assert!(windowed_correlations(&p, &[(6, 10)]).is_err());
        assert!(windowed_correlations(&p, &[(3, 3)]).is_err());
    }

    #[test]
    fn exact_line_fit() {
        let x: Vec<f64> = (0..20).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let r = ols_anova(&y, &[&x]).unwrap();
        assert!((r.slope() - 2.0).abs() < 1e-12);
        assert!(r.intercept.abs() < 1e-12);
        assert_eq!(r.r_squared, 1.0);
        assert!(r.residuals.iter().all(|e| e.abs() < 1e-12));
        assert_eq!(r.f_p_value, 0.0);
        assert_eq!(r.durbin_watson, None);
    }

    #[test]
    fn unrelated_noise_has_small_r2() {
        let x = noise(10, 200);
        let y = noise(11, 200);
        let r = ols_anova(&y, &[&x]).unwrap();
        assert!(r.r_squared < 0.05, "R2 = {}", r.r_squared);
        assert!(r.f_p_value > 0.01, "p = {}", r.f_p_value);
        assert!(r.durbin_watson.unwrap() > 0.0 && r.durbin_watson.unwrap() < 4.0);
    }

    #[test]
    fn singular_design_reported() {
        let x: Vec<f64> = (0..20).map(f64::from).collect();
        let c = vec![5.0; 20];
        assert!(matches!(ols_anova(&x, &[&c]), Err(Error::SingularDesign(_))));
    }

    #[test]
    fn dw_alternating_and_white_noise() {
        let alt: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        // 99 squared jumps of 2 over 100 unit squares
        assert!((durbin_watson(&alt).unwrap() - 3.96).abs() < 1e-12);
        let e = noise(3, 1000);
        assert!((durbin_watson(&e).unwrap() - 2.0).abs() < 0.15);
        assert!(durbin_watson(&[0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn residuals_orthogonal_to_design() {
        let x1 = noise(4, 120);
        let x2: Vec<f64> = noise(5, 120).iter().map(|v| 1e4 + 100.0 * v).collect();
        let y: Vec<f64> = x1.iter().zip(&x2).zip(noise(6, 120)).map(|((a, b), e)| 3.0 * a - 0.01 * b + e).collect();
        let r = ols_anova(&y, &[&x1, &x2]).unwrap();
        let e = &r.residuals;
        let scale = e.iter().map(|v| v * v).sum::<f64>().sqrt();
        for col in [vec![1.0; 120], x1.clone(), x2.clone()] {
            let cn = col.iter().map(|v| v * v).sum::<f64>().sqrt();
            let dot: f64 = col.iter().zip(e).map(|(a, b)| a * b).sum();
            assert!(dot.abs() < 1e-8 * cn * scale);
        }
        let sum: f64 = e.iter().sum();
        assert!(sum.abs() < 1e-8 * scale);
        assert!((0.0..=1.0).contains(&r.r_squared));
    }

    #[test]
    fn dw_tracks_lag_one_autocorrelation() {
        for (seed, phi) in [(20u64, 0.0), (21, 0.5), (22, 0.8), (23, -0.4)] {
            let e = noise(seed, 2000);
            let mut x = vec![0.0; 2000];
            for t in 1..2000 {
                x[t] = phi * x[t - 1] + e[t];
            }
            let m = mean(&x);
            let c0: f64 = x.iter().map(|v| (v - m).powi(2)).sum();
            let c1: f64 = x.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
            let rho = c1 / c0;
            let dw = durbin_watson(&x).unwrap();
            assert!((dw - 2.0 * (1.0 - rho)).abs() < 0.05, "phi={phi}: {dw} vs {rho}");
        }
    }

    proptest! {
        #[test]
        fn pearson_bounded_and_affine_invariant(
            xs in prop::collection::vec(-100.0f64..100.0, 5..60),
            a in 0.1f64..10.0, b in -50.0f64..50.0, seed in 0u64..1000,
        ) {
            let ys: Vec<f64> = noise(seed, xs.len()).iter().zip(&xs).map(|(e, x)| 0.3 * x + e).collect();
            if let Ok(r) = pearson(&xs, &ys) {
                prop_assert!(r.abs() <= 1.0);
                let xt: Vec<f64> = xs.iter().map(|v| a * v + b).collect();
                let r2 = pearson(&xt, &ys).unwrap();
                prop_assert!((r - r2).abs() < 1e-12);
            }
        }

        #[test]
        fn covariance_symmetric(xs in prop::collection::vec(-1e3f64..1e3, 2..50), seed in 0u64..100) {
            let ys = noise(seed, xs.len());
            prop_assert_eq!(covariance(&xs, &ys).unwrap(), covariance(&ys, &xs).unwrap());
        }
    }
}
