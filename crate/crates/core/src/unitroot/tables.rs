//! Critical values and p-value approximations.

use super::{Level, TrendSpec};
use crate::special::normal_cdf;

/// Dickey–Fuller critical values (shared by ADF and Phillips–Perron) as
/// printed in the reference tables, ordered 10%, 5%, 1%.
pub fn df_critical_values(trend: TrendSpec) -> [(Level, f64); 3] {
    let v = match trend {
        TrendSpec::None => [-1.62, -1.94, -2.57],
        TrendSpec::Constant => [-2.57, -2.86, -3.44],
        TrendSpec::ConstantAndLinear => [-3.13, -3.41, -3.97],
    };
    [(Level::Ten, v[0]), (Level::Five, v[1]), (Level::One, v[2])]
}

/// KPSS critical values as printed in the reference tables, ordered 10%, 5%,
/// 1%. `None` for the unsupported no-deterministic-term case.
pub fn kpss_critical_values(trend: TrendSpec) -> Option<[(Level, f64); 3]> {
    let v = match trend {
        TrendSpec::None => return None,
        TrendSpec::Constant => [0.35, 0.46, 0.74],
        TrendSpec::ConstantAndLinear => [0.12, 0.15, 0.22],
    };
    Some([(Level::Ten, v[0]), (Level::Five, v[1]), (Level::One, v[2])])
}

struct Surface {
    max: f64,
    min: f64,
    star: f64,
    small: [f64; 3],
    large: [f64; 4],
}

// MacKinnon (1994) response surface for a single I(1) series.
fn surface(trend: TrendSpec) -> Surface {
    match trend {
        TrendSpec::None => Surface {
            max: f64::INFINITY,
            min: -19.04,
            star: -1.04,
            small: [0.6344, 1.2378, 3.2496e-2],
            large: [0.4797, 9.3557e-1, -0.6999e-1, 3.3066e-2],
        },
        TrendSpec::Constant => Surface {
            max: 2.74,
            min: -18.83,
            star: -1.61,
            small: [2.1659, 1.4412, 3.8269e-2],
            large: [1.7339, 9.3202e-1, -1.2745e-1, -1.0368e-2],
        },
        TrendSpec::ConstantAndLinear => Surface {
            max: 0.7,
            min: -16.18,
            star: -2.89,
            small: [3.2512, 1.6047, 4.9588e-2],
            large: [2.5261, 6.1654e-1, -3.7956e-1, -6.0285e-2],
        },
    }
}

fn poly(coef: &[f64], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Approximate asymptotic p-value of a Dickey–Fuller tau statistic
/// (left tail).
pub fn mackinnon_p(stat: f64, trend: TrendSpec) -> f64 {
    let s = surface(trend);
    if stat > s.max {
        return 1.0;
    }
    if stat < s.min {
        return 0.0;
    }
    if stat <= s.star {
        normal_cdf(poly(&s.small, stat))
    } else {
        normal_cdf(poly(&s.large, stat))
    }
}

/// Whether a KPSS p-value is exact or only bounded by the tabulated range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PBound {
    Exact,
    /// True p-value is at least the reported one.
    AtLeast,
    /// True p-value is at most the reported one.
    AtMost,
}

// KPSS (1992) upper-tail quantiles for p = 0.10, 0.05, 0.025, 0.01.
const KPSS_P: [f64; 4] = [0.10, 0.05, 0.025, 0.01];
const KPSS_LEVEL_Q: [f64; 4] = [0.347, 0.463, 0.574, 0.739];
const KPSS_TREND_Q: [f64; 4] = [0.119, 0.146, 0.176, 0.216];

/// KPSS p-value by linear interpolation between the tabulated quantiles,
/// clamped to [0.01, 0.10].
pub fn kpss_p(stat: f64, trend: TrendSpec) -> (f64, PBound) {
    let q = match trend {
        TrendSpec::ConstantAndLinear => &KPSS_TREND_Q,
        _ => &KPSS_LEVEL_Q,
    };
    if stat <= q[0] {
        return (KPSS_P[0], PBound::AtLeast);
    }
    if stat >= q[3] {
        return (KPSS_P[3], PBound::AtMost);
    }
    let i = q.iter().rposition(|v| *v <= stat).unwrap_or(0);
    let t = (stat - q[i]) / (q[i + 1] - q[i]);
    (KPSS_P[i] + t * (KPSS_P[i + 1] - KPSS_P[i]), PBound::Exact)
}
