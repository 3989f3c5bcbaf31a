//! Seeded synthetic input files with known structure, for demos, tests and
//! benchmarks.
//!
//! In rupees: gold and the index share a random-walk trend and a 64-week
//! cycle in fixed 1:2 proportion, so `index - 2 gold` is stationary and the
//! two are coherent in the 64-week band. Crude follows its own random walk.
//! USD series are the rupee series divided by a slowly wandering rate.

use std::path::Path;

use chrono::NaiveDate;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::pipeline::InputPaths;
use crate::rng::SeedTree;

pub const PLANTED_PERIOD: f64 = 64.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticInputs {
    pub dates: Vec<NaiveDate>,
    pub nifty: Vec<f64>,
    pub gold_usd: Vec<f64>,
    pub wti_usd: Vec<f64>,
    pub usdinr: Vec<f64>,
}

pub fn planted_inputs(n: usize, seed: u64) -> SyntheticInputs {
    let seeds = SeedTree::new(seed).child("synthetic");
    let draws = |name: &str| -> Vec<f64> {
        let mut rng = seeds.child(name).rng();
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    };
    let walk = |steps: Vec<f64>| -> Vec<f64> {
        steps
            .iter()
            .scan(0.0, |acc, s| {
                *acc += s;
                Some(*acc)
            })
            .collect()
    };
    let trend = walk(draws("trend"));
    let crude = walk(draws("crude"));
    let rate = walk(draws("rate"));
    let (eg, en, eo) = (draws("gold_noise"), draws("nifty_noise"), draws("crude_noise"));
    let start = NaiveDate::from_ymd_opt(2000, 1, 2).expect("valid date");
    let mut out = SyntheticInputs {
        dates: (0..n).map(|t| start + chrono::Duration::weeks(t as i64)).collect(),
        nifty: Vec::with_capacity(n),
        gold_usd: Vec::with_capacity(n),
        wti_usd: Vec::with_capacity(n),
        usdinr: Vec::with_capacity(n),
    };
    for t in 0..n {
        let cycle = (std::f64::consts::TAU * t as f64 / PLANTED_PERIOD).sin();
        let fx = 70.0 * (0.002 * rate[t]).exp();
        let gold_inr = 3000.0 + 10.0 * trend[t] + 30.0 * cycle + 3.0 * eg[t];
        let nifty = 6000.0 + 20.0 * trend[t] + 60.0 * cycle + 6.0 * en[t];
        let crude_inr = 4000.0 + 15.0 * crude[t] + 5.0 * eo[t];
        out.nifty.push(nifty);
        out.gold_usd.push(gold_inr / fx);
        out.wti_usd.push(crude_inr / fx);
        out.usdinr.push(fx);
    }
    out
}

impl SyntheticInputs {
    /// Writes nifty.csv, gold_usd.csv, wti_usd.csv and usdinr.csv (columns
    /// `date,close`) into `dir`.
    pub fn write_csvs(&self, dir: &Path) -> Result<InputPaths> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: &str, values: &[f64]| -> Result<std::path::PathBuf> {
            let path = dir.join(name);
            let mut text = String::from("date,close\n");
            for (d, v) in self.dates.iter().zip(values) {
                text.push_str(&format!("{},{v}\n", d.format("%Y-%m-%d")));
            }
            std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
            Ok(path)
        };
        Ok(InputPaths {
            nifty: write("nifty.csv", &self.nifty)?,
            gold_usd: write("gold_usd.csv", &self.gold_usd)?,
            wti_usd: write("wti_usd.csv", &self.wti_usd)?,
            usdinr: write("usdinr.csv", &self.usdinr)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_and_positive() {
        let a = planted_inputs(512, 3);
        assert_eq!(a, planted_inputs(512, 3));
        assert_ne!(a.nifty, planted_inputs(512, 4).nifty);
        for v in [&a.nifty, &a.gold_usd, &a.wti_usd, &a.usdinr] {
            assert!(v.iter().all(|x| *x > 0.0));
        }
    }
}
