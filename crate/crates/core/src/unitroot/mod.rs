//! Unit-root and stationarity tests: augmented Dickey–Fuller,
//! Phillips–Perron and KPSS, each under three deterministic specifications.

mod adf;
mod kpss;
mod pp;
pub mod tables;

use std::fmt;

pub use adf::{adf_test, adf_test_fixed_lags, default_adf_max_lags};
pub use kpss::kpss_test;
pub use pp::{default_bandwidth, pp_test};
pub use tables::PBound;

use crate::error::{Error, Result};

/// Deterministic terms included in the test regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TrendSpec {
    None,
    Constant,
    ConstantAndLinear,
}

impl TrendSpec {
    pub const ALL: [TrendSpec; 3] = [TrendSpec::Constant, TrendSpec::None, TrendSpec::ConstantAndLinear];

    pub fn label(self) -> &'static str {
        match self {
            TrendSpec::None => "No Trend",
            TrendSpec::Constant => "Constant",
            TrendSpec::ConstantAndLinear => "Constant and Linear Trend",
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            TrendSpec::None => "none",
            TrendSpec::Constant => "constant",
            TrendSpec::ConstantAndLinear => "constant_and_linear",
        }
    }

    fn n_deterministic(self) -> usize {
        match self {
            TrendSpec::None => 0,
            TrendSpec::Constant => 1,
            TrendSpec::ConstantAndLinear => 2,
        }
    }

    /// Deterministic regressor columns for `n` observations.
    pub(crate) fn columns(self, n: usize) -> Vec<Vec<f64>> {
        let mut cols = Vec::new();
        if self.n_deterministic() >= 1 {
            cols.push(vec![1.0; n]);
        }
        if self.n_deterministic() >= 2 {
            cols.push((1..=n).map(|t| t as f64).collect());
        }
        cols
    }
}

impl std::str::FromStr for TrendSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" | "n" => Ok(TrendSpec::None),
            "constant" | "c" => Ok(TrendSpec::Constant),
            "constant_and_linear" | "trend" | "ct" => Ok(TrendSpec::ConstantAndLinear),
            other => Err(Error::InvalidArgument(format!("unknown trend spec `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnitRootTest {
    Adf,
    PhillipsPerron,
    Kpss,
}

impl UnitRootTest {
    pub fn label(self) -> &'static str {
        match self {
            UnitRootTest::Adf => "ADF",
            UnitRootTest::PhillipsPerron => "PP",
            UnitRootTest::Kpss => "KPSS",
        }
    }
}

impl std::str::FromStr for UnitRootTest {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "adf" => Ok(UnitRootTest::Adf),
            "pp" => Ok(UnitRootTest::PhillipsPerron),
            "kpss" => Ok(UnitRootTest::Kpss),
            other => Err(Error::InvalidArgument(format!("unknown test `{other}`"))),
        }
    }
}

/// Significance level of a tabulated critical value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    Ten,
    Five,
    One,
}

impl Level {
    pub fn alpha(self) -> f64 {
        match self {
            Level::Ten => 0.10,
            Level::Five => 0.05,
            Level::One => 0.01,
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Ten => "10%",
            Level::Five => "5%",
            Level::One => "1%",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitRootReport {
    pub test: UnitRootTest,
    pub statistic: f64,
    pub p_value: f64,
    pub p_bound: PBound,
    /// Augmentation lags (ADF) or long-run variance bandwidth (PP, KPSS).
    pub lags: usize,
    pub trend: TrendSpec,
    pub nobs: usize,
    pub critical_values: [(Level, f64); 3],
    pub reject_at: Vec<Level>,
}

impl UnitRootReport {
    fn new(
        test: UnitRootTest,
        statistic: f64,
        (p_value, p_bound): (f64, PBound),
        lags: usize,
        trend: TrendSpec,
        nobs: usize,
        critical_values: [(Level, f64); 3],
    ) -> Self {
        let right_tail = test == UnitRootTest::Kpss;
        let reject_at = critical_values
            .iter()
            .filter(|(_, cv)| if right_tail { statistic > *cv } else { statistic < *cv })
            .map(|(l, _)| *l)
            .collect();
        Self {
            test,
            statistic,
            p_value,
            p_bound,
            lags,
            trend,
            nobs,
            critical_values,
            reject_at,
        }
    }

    pub fn rejects(&self, level: Level) -> bool {
        self.reject_at.contains(&level)
    }

    /// True when the null is a unit root (ADF, PP), false for KPSS.
    pub fn null_is_unit_root(&self) -> bool {
        self.test != UnitRootTest::Kpss
    }
}

/// Bartlett-kernel (Newey–West) long-run variance of a residual series,
/// without demeaning.
pub(crate) fn newey_west(u: &[f64], bandwidth: usize) -> f64 {
    let n = u.len() as f64;
    let gamma = |j: usize| u[j..].iter().zip(u).map(|(a, b)| a * b).sum::<f64>() / n;
    let mut lr = gamma(0);
    for j in 1..=bandwidth.min(u.len() - 1) {
        lr += 2.0 * (1.0 - j as f64 / (bandwidth as f64 + 1.0)) * gamma(j);
    }
    lr
}
