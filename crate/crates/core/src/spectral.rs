//! Periodogram on an arbitrary frequency grid (cycles per sample).

use std::io::Write;

use rayon::prelude::*;
use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Periodogram {
    frequencies: Vec<f64>,
    power: Vec<f64>,
}

impl Periodogram {
    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn power(&self) -> &[f64] {
        &self.power
    }

    pub fn len(&self) -> usize {
        self.power.len()
    }

    pub fn is_empty(&self) -> bool {
        self.power.is_empty()
    }

    /// Grid points above 0.5 cycles per sample, which alias onto lower ones.
    pub fn above_nyquist(&self) -> usize {
        self.frequencies.iter().filter(|f| **f > 0.5).count()
    }

    /// Index of the largest power (first one on ties).
    pub fn peak(&self) -> usize {
        let mut best = 0;
        for (i, p) in self.power.iter().enumerate() {
            if *p > self.power[best] {
                best = i;
            }
        }
        best
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "frequency,power")?;
        for (f, p) in self.frequencies.iter().zip(&self.power) {
            writeln!(w, "{f},{p}")?;
        }
        Ok(())
    }
}

/// The N Fourier frequencies k/N, k = 0..N.
pub fn fourier_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| k as f64 / n as f64).collect()
}

/// Fourier frequencies k/N for bin indices 0..=max_index.
pub fn index_grid(n: usize, max_index: usize) -> Vec<f64> {
    (0..=max_index).map(|k| k as f64 / n as f64).collect()
}

pub fn frequency_scan(x: &[f64], grid: &[f64]) -> Result<Periodogram> {
    frequency_scan_with(x, grid, false)
}

/// power(f) = |Σ_t x_t exp(2πi f t)|² / N for every f on the grid.
pub fn frequency_scan_with(x: &[f64], grid: &[f64], demean: bool) -> Result<Periodogram> {
    let n = x.len();
    if n < 4 {
        return Err(Error::SampleSize(format!("{n} observations; need at least 4")));
    }
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty frequency grid".into()));
    }
    if let Some(f) = grid.iter().find(|f| !(f.is_finite() && **f >= 0.0)) {
        return Err(Error::InvalidArgument(format!("bad frequency {f}")));
    }
    let mut data = x.to_vec();
    if demean {
        let m = data.iter().sum::<f64>() / n as f64;
        data.iter_mut().for_each(|v| *v -= m);
    }
    let power = match canonical_bins(grid, n) {
        Some(bins) => fft_power(&data, &bins),
        None => grid.par_iter().map(|&f| naive_power(&data, f)).collect(),
    };
    Ok(Periodogram {
        frequencies: grid.to_vec(),
        power,
    })
}

/// Bin indices when every grid point is some k/N; None otherwise.
fn canonical_bins(grid: &[f64], n: usize) -> Option<Vec<usize>> {
    grid.iter()
        .map(|f| {
            let k = (f * n as f64).round();
            ((f * n as f64 - k).abs() < 1e-9).then_some(k as usize % n)
        })
        .collect()
}

fn fft_power(x: &[f64], bins: &[usize]) -> Vec<f64> {
    let n = x.len();
    let mut buf: Vec<Complex<f64>> = x.iter().map(|v| Complex::new(*v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    bins.iter().map(|&k| buf[k].norm_sqr() / n as f64).collect()
}

fn naive_power(x: &[f64], f: f64) -> f64 {
    let (mut re, mut im) = (0.0, 0.0);
    for (t, v) in x.iter().enumerate() {
        // reduce the phase first so large t*f keeps full precision
        let phase = std::f64::consts::TAU * (f * t as f64).fract();
        re += v * phase.cos();
        im += v * phase.sin();
    }
    (re * re + im * im) / x.len() as f64
}
