//! Morlet continuous wavelet transform, cross-wavelet spectra, smoothed
//! wavelet coherence, multiple wavelet coherence and AR(1) Monte-Carlo
//! significance.
//!
//! Grids are stored row-major by scale: `grid[s][t]`. The sampling interval is
//! one week throughout, so scales, periods and the cone of influence are all in
//! weeks.

use std::f64::consts::PI;
use std::io::Write;
use std::ops::Range;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

pub use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::rng::SeedTree;

pub const OMEGA0: f64 = 6.0;
pub const MIN_SERIES_LEN: usize = 16;

pub type RealGrid = Vec<Vec<f64>>;
pub type ComplexGrid = Vec<Vec<Complex64>>;

/// Fourier period of a Morlet wavelet at unit scale.
pub fn fourier_factor() -> f64 {
    4.0 * PI / (OMEGA0 + (2.0 + OMEGA0 * OMEGA0).sqrt())
}

/// Mother-wavelet mean relative to its peak, ψ̂(0) / max ψ̂. The Morlet
/// wavelet is only approximately admissible; at ω0 = 6 this is about 1.5e-8.
pub fn admissibility_residual() -> f64 {
    (-0.5 * OMEGA0 * OMEGA0).exp()
}

/// Dyadic grid s0 · 2^(k/voices) up to the smaller of `max_scale` and N/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleGrid {
    pub s0: f64,
    pub voices_per_octave: usize,
    pub max_scale: f64,
}

impl Default for ScaleGrid {
    fn default() -> Self {
        ScaleGrid {
            s0: 2.0,
            voices_per_octave: 8,
            max_scale: 512.0,
        }
    }
}

impl ScaleGrid {
    pub fn scales(&self, n: usize) -> Vec<f64> {
        let top = self.max_scale.min(n as f64 / 2.0) * (1.0 + 1e-12);
        let dj = 1.0 / self.voices_per_octave.max(1) as f64;
        (0..)
            .map(|k| self.s0 * (k as f64 * dj).exp2())
            .take_while(|s| *s <= top)
            .collect()
    }
}

fn check_scales(n: usize, scales: &[f64]) -> Result<()> {
    if n < MIN_SERIES_LEN {
        return Err(Error::SampleSize(format!(
            "{n} observations; the wavelet transform needs at least {MIN_SERIES_LEN}"
        )));
    }
    if scales.is_empty() {
        return Err(Error::InvalidArgument("empty scale grid".into()));
    }
    let (lo, hi) = (2.0, n as f64 / 2.0);
    for s in scales {
        if !(s.is_finite() && *s >= lo * (1.0 - 1e-12) && *s <= hi * (1.0 + 1e-12)) {
            return Err(Error::InvalidArgument(format!(
                "scale {s} outside [{lo}, {hi}] for {n} observations"
            )));
        }
    }
    if scales.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("scales must be strictly increasing".into()));
    }
    Ok(())
}

/// Largest trustworthy period at each time: e-folding distance √2·s from the
/// nearest edge, converted to a period and capped at the largest period.
fn cone_of_influence(n: usize, max_period: f64) -> Vec<f64> {
    let k = fourier_factor() / 2f64.sqrt();
    (0..n)
        .map(|t| (k * t.min(n - 1 - t) as f64).min(max_period))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CwtField {
    coefficients: ComplexGrid,
    scales: Vec<f64>,
    periods: Vec<f64>,
    coi: Vec<f64>,
    dt: f64,
}

impl CwtField {
    pub fn coefficients(&self) -> &ComplexGrid {
        &self.coefficients
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn periods(&self) -> &[f64] {
        &self.periods
    }

    pub fn coi(&self) -> &[f64] {
        &self.coi
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.coi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coi.is_empty()
    }

    pub fn inside_coi(&self, t: usize, row: usize) -> bool {
        self.periods[row] <= self.coi[t]
    }
}

/// FFT plans and daughter-wavelet spectra for one (N, scales) pair.
pub struct CwtPlan {
    n: usize,
    padded: usize,
    scales: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    daughters: Vec<Vec<f64>>,
}

impl CwtPlan {
    pub fn new(n: usize, scales: &[f64]) -> Result<Self> {
        check_scales(n, scales)?;
        if admissibility_residual() > 1e-6 {
            return Err(Error::Unsupported("mother wavelet is not admissible".into()));
        }
        // zeros on both sides cover the widest daughter, so the transform is
        // a plain convolution with a zero-extended series
        let padded = (3 * n).next_power_of_two();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(padded);
        let ifft = planner.plan_fft_inverse(padded);
        // Unit energy on the discrete frequency grid rather than the analytic
        // sqrt(2πs)·π^(-1/4): at s = 2 the daughter straddles Nyquist and the
        // analytic constant would leave only 65% of the white-noise level.
        let daughters = scales
            .iter()
            .map(|&s| {
                let mut psi: Vec<f64> = (0..padded)
                    .map(|k| {
                        if k == 0 || k > padded / 2 {
                            return 0.0;
                        }
                        let w = 2.0 * PI * k as f64 / padded as f64;
                        (-0.5 * (s * w - OMEGA0).powi(2)).exp()
                    })
                    .collect();
                let energy = psi.iter().map(|p| p * p).sum::<f64>() / padded as f64;
                let norm = energy.sqrt().recip();
                psi.iter_mut().for_each(|p| *p *= norm);
                psi
            })
            .collect();
        Ok(CwtPlan {
            n,
            padded,
            scales: scales.to_vec(),
            fft,
            ifft,
            daughters,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn periods(&self) -> Vec<f64> {
        self.scales.iter().map(|s| s * fourier_factor()).collect()
    }

    pub fn transform(&self, x: &[f64]) -> Result<CwtField> {
        if x.len() != self.n {
            return Err(Error::InvalidArgument(format!(
                "series has {} observations, plan expects {}",
                x.len(),
                self.n
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("series has non-finite values".into()));
        }
        let mean = x.iter().sum::<f64>() / self.n as f64;
        let mut spectrum: Vec<Complex64> = x
            .iter()
            .map(|v| Complex64::new(v - mean, 0.0))
            .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
            .take(self.padded)
            .collect();
        self.fft.process(&mut spectrum);
        let scale = 1.0 / self.padded as f64;
        let coefficients = self
            .daughters
            .iter()
            .map(|psi| {
                let mut row: Vec<Complex64> =
                    spectrum.iter().zip(psi).map(|(a, p)| a * (p * scale)).collect();
                self.ifft.process(&mut row);
                row.truncate(self.n);
                row
            })
            .collect();
        let periods = self.periods();
        let coi = cone_of_influence(self.n, *periods.last().unwrap());
        Ok(CwtField {
            coefficients,
            scales: self.scales.clone(),
            periods,
            coi,
            dt: 1.0,
        })
    }
}

/// Analytic-Morlet CWT, unit energy at every scale: white noise of variance
/// σ² has expected power σ² at all scales.
pub fn morlet_cwt(x: &[f64], scales: &[f64]) -> Result<CwtField> {
    CwtPlan::new(x.len(), scales)?.transform(x)
}

pub fn wavelet_power(field: &CwtField) -> RealGrid {
    field
        .coefficients
        .iter()
        .map(|row| row.iter().map(|w| w.norm_sqr()).collect())
        .collect()
}

fn same_grid(a: &CwtField, b: &CwtField) -> Result<()> {
    if a.scales != b.scales || a.len() != b.len() {
        return Err(Error::InvalidArgument("wavelet fields have different grids".into()));
    }
    Ok(())
}

/// W_a · conj(W_b).
pub fn cross_wavelet(a: &CwtField, b: &CwtField) -> Result<ComplexGrid> {
    same_grid(a, b)?;
    Ok(a.coefficients
        .iter()
        .zip(&b.coefficients)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(u, v)| u * v.conj()).collect())
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingConfig {
    /// Gaussian standard deviation in time, as a multiple of the row's scale.
    pub time_sigma_factor: f64,
    /// Full width of the boxcar across scales, in decades of scale.
    pub scale_width_decades: f64,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        SmoothingConfig {
            time_sigma_factor: 1.0,
            scale_width_decades: 0.6,
        }
    }
}

struct TimeKernel {
    padded: usize,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    response: Vec<f64>,
    /// Kernel mass falling inside [0, N) at each time, for edge renormalisation.
    mass: Vec<f64>,
}

impl TimeKernel {
    fn new(n: usize, sigma: f64, planner: &mut FftPlanner<f64>) -> Self {
        let padded = (n + (8.0 * sigma).ceil() as usize + 1).next_power_of_two();
        let fft = planner.plan_fft_forward(padded);
        let ifft = planner.plan_fft_inverse(padded);
        let response: Vec<f64> = (0..padded)
            .map(|k| {
                let f = k.min(padded - k) as f64 / padded as f64;
                (-2.0 * (PI * sigma * f).powi(2)).exp() / padded as f64
            })
            .collect();
        let mut kernel = TimeKernel {
            padded,
            fft,
            ifft,
            response,
            mass: vec![1.0; n],
        };
        let ones = vec![Complex64::new(1.0, 0.0); n];
        kernel.mass = kernel.convolve(&ones).iter().map(|c| c.re).collect();
        kernel
    }

    fn convolve(&self, row: &[Complex64]) -> Vec<Complex64> {
        let n = row.len();
        let mut buf: Vec<Complex64> = row
            .iter()
            .copied()
            .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
            .take(self.padded)
            .collect();
        self.fft.process(&mut buf);
        buf.iter_mut().zip(&self.response).for_each(|(b, r)| *b *= r);
        self.ifft.process(&mut buf);
        buf.truncate(n);
        buf
    }

    fn smooth(&self, row: &[Complex64]) -> Vec<Complex64> {
        let mut out = self.convolve(row);
        out.iter_mut().zip(&self.mass).for_each(|(o, m)| *o /= m);
        out
    }
}

/// Gaussian-in-time then boxcar-in-log-scale smoothing, both normalised to
/// unit mass after truncation at the grid edges.
pub struct Smoother {
    n: usize,
    time: Vec<TimeKernel>,
    /// Per output row: (input row, weight), weights summing to 1.
    across: Vec<Vec<(usize, f64)>>,
}

impl Smoother {
    pub fn new(n: usize, scales: &[f64], config: &SmoothingConfig) -> Result<Self> {
        if !(config.time_sigma_factor > 0.0 && config.scale_width_decades >= 0.0) {
            return Err(Error::InvalidArgument(format!("bad smoothing widths {config:?}")));
        }
        let mut planner = FftPlanner::new();
        let time = scales
            .iter()
            .map(|s| TimeKernel::new(n, config.time_sigma_factor * s, &mut planner))
            .collect();
        Ok(Smoother {
            n,
            time,
            across: scale_weights(scales, config.scale_width_decades),
        })
    }

    pub fn smooth(&self, grid: &[Vec<Complex64>]) -> ComplexGrid {
        let rows: ComplexGrid = grid
            .iter()
            .zip(&self.time)
            .map(|(row, k)| k.smooth(row))
            .collect();
        self.across
            .iter()
            .map(|weights| {
                let mut out = vec![Complex64::new(0.0, 0.0); self.n];
                for &(k, w) in weights {
                    out.iter_mut().zip(&rows[k]).for_each(|(o, v)| *o += v * w);
                }
                out
            })
            .collect()
    }

    pub fn smooth_real(&self, grid: &[Vec<f64>]) -> RealGrid {
        let complex: ComplexGrid = grid
            .iter()
            .map(|row| row.iter().map(|v| Complex64::new(*v, 0.0)).collect())
            .collect();
        self.smooth(&complex)
            .into_iter()
            .map(|row| row.into_iter().map(|c| c.re).collect())
            .collect()
    }
}

/// Each row owns the log10-scale interval between the midpoints to its
/// neighbours; its weight for output row i is the overlap of that interval
/// with a window of `width` decades centred on row i.
fn scale_weights(scales: &[f64], width: f64) -> Vec<Vec<(usize, f64)>> {
    let logs: Vec<f64> = scales.iter().map(|s| s.log10()).collect();
    let s = logs.len();
    let cell = |k: usize| {
        let lo = if k == 0 {
            if s > 1 { logs[0] - 0.5 * (logs[1] - logs[0]) } else { logs[0] - 0.5 }
        } else {
            0.5 * (logs[k - 1] + logs[k])
        };
        let hi = if k + 1 == s {
            if s > 1 { logs[k] + 0.5 * (logs[k] - logs[k - 1]) } else { logs[k] + 0.5 }
        } else {
            0.5 * (logs[k] + logs[k + 1])
        };
        (lo, hi)
    };
    (0..s)
        .map(|i| {
            if width == 0.0 {
                return vec![(i, 1.0)];
            }
            let (a, b) = (logs[i] - 0.5 * width, logs[i] + 0.5 * width);
            let raw: Vec<(usize, f64)> = (0..s)
                .filter_map(|k| {
                    let (lo, hi) = cell(k);
                    let overlap = hi.min(b) - lo.max(a);
                    (overlap > 0.0).then_some((k, overlap))
                })
                .collect();
            let total: f64 = raw.iter().map(|(_, w)| w).sum();
            raw.into_iter().map(|(k, w)| (k, w / total)).collect()
        })
        .collect()
}

/// One-shot smoothing of a real grid with the given scales.
pub fn smooth(grid: &[Vec<f64>], scales: &[f64], config: &SmoothingConfig) -> Result<RealGrid> {
    let n = grid.first().map_or(0, Vec::len);
    if grid.len() != scales.len() || grid.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidArgument("grid shape does not match scales".into()));
    }
    Ok(Smoother::new(n, scales, config)?.smooth_real(grid))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceField {
    values: RealGrid,
    phase: Option<RealGrid>,
    significance: Option<RealGrid>,
    scales: Vec<f64>,
    periods: Vec<f64>,
    coi: Vec<f64>,
    clamped: usize,
    undefined: usize,
}

impl CoherenceField {
    /// R² or RM² per (scale row, time); NaN marks an undefined cell.
    pub fn values(&self) -> &RealGrid {
        &self.values
    }

    pub fn phase(&self) -> Option<&RealGrid> {
        self.phase.as_ref()
    }

    pub fn significance(&self) -> Option<&RealGrid> {
        self.significance.as_ref()
    }

    pub fn set_significance(&mut self, p_values: RealGrid) {
        self.significance = Some(p_values);
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn periods(&self) -> &[f64] {
        &self.periods
    }

    pub fn coi(&self) -> &[f64] {
        &self.coi
    }

    pub fn len(&self) -> usize {
        self.coi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coi.is_empty()
    }

    /// Cells pulled back into [0, 1].
    pub fn clamped(&self) -> usize {
        self.clamped
    }

    /// Cells left undefined because the two predictors were collinear there.
    pub fn undefined(&self) -> usize {
        self.undefined
    }

    pub fn inside_coi(&self, t: usize, row: usize) -> bool {
        self.periods[row] <= self.coi[t]
    }

    /// Mean of the defined values with period in [lo, hi] and time in `times`,
    /// optionally restricted to the cone of influence. None if no cell qualifies.
    pub fn band_mean(&self, lo: f64, hi: f64, times: Range<usize>, coi_only: bool) -> Option<f64> {
        let (mut sum, mut count) = (0.0, 0usize);
        for (row, period) in self.periods.iter().enumerate() {
            if *period < lo || *period > hi {
                continue;
            }
            for t in times.start..times.end.min(self.len()) {
                let v = self.values[row][t];
                if v.is_nan() || (coi_only && !self.inside_coi(t, row)) {
                    continue;
                }
                sum += v;
                count += 1;
            }
        }
        (count > 0).then(|| sum / count as f64)
    }

    /// Rows `time,period,value`, time-major; undefined cells print as NA.
    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        write_grid_csv(&self.values, &self.periods, w)
    }

    /// Same layout as `write_csv` with p-values; false if none are attached.
    pub fn write_significance_csv<W: Write>(&self, w: W) -> std::io::Result<bool> {
        match &self.significance {
            Some(p) => write_grid_csv(p, &self.periods, w).map(|_| true),
            None => Ok(false),
        }
    }

    /// Binary 8-bit greyscale image, one column per time and one row per
    /// scale, shortest period first; 255 is a value of 1, undefined cells are 0.
    pub fn write_pgm<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "P5\n{} {}\n255\n", self.len(), self.periods.len())?;
        for row in &self.values {
            let pixels: Vec<u8> = row
                .iter()
                .map(|v| if v.is_nan() { 0 } else { (255.0 * v.clamp(0.0, 1.0)).round() as u8 })
                .collect();
            w.write_all(&pixels)?;
        }
        Ok(())
    }
}

fn write_grid_csv<W: Write>(grid: &RealGrid, periods: &[f64], mut w: W) -> std::io::Result<()> {
    writeln!(w, "time,period,value")?;
    let n = grid.first().map_or(0, Vec::len);
    for t in 0..n {
        for (row, period) in periods.iter().enumerate() {
            let v = grid[row][t];
            if v.is_nan() {
                writeln!(w, "{t},{period},NA")?;
            } else {
                writeln!(w, "{t},{period},{v}")?;
            }
        }
    }
    Ok(())
}

fn clamp_unit(v: f64, clamped: &mut usize) -> f64 {
    if v > 1.0 {
        *clamped += 1;
        1.0
    } else if v < 0.0 {
        *clamped += 1;
        0.0
    } else {
        v
    }
}

/// Threshold on 1 - R²(x, y) below which multiple coherence is undefined.
pub const COLLINEAR_EPS: f64 = 1e-6;

/// Transform plan plus smoother, reusable across many series of one length.
pub struct CoherenceEngine {
    plan: CwtPlan,
    smoother: Smoother,
}

impl CoherenceEngine {
    pub fn new(n: usize, scales: &[f64], config: &SmoothingConfig) -> Result<Self> {
        Ok(CoherenceEngine {
            plan: CwtPlan::new(n, scales)?,
            smoother: Smoother::new(n, scales, config)?,
        })
    }

    pub fn plan(&self) -> &CwtPlan {
        &self.plan
    }

    pub fn transform(&self, x: &[f64]) -> Result<CwtField> {
        self.plan.transform(x)
    }

    /// S(s⁻¹ W_a conj(W_b)).
    pub fn smoothed_cross(&self, a: &CwtField, b: &CwtField) -> Result<ComplexGrid> {
        let mut cross = cross_wavelet(a, b)?;
        for (row, s) in cross.iter_mut().zip(a.scales()) {
            row.iter_mut().for_each(|c| *c /= s);
        }
        Ok(self.smoother.smooth(&cross))
    }

    fn smoothed_power(&self, a: &CwtField) -> Result<RealGrid> {
        let grid = self.smoothed_cross(a, a)?;
        let power: RealGrid = grid.into_iter().map(|r| r.into_iter().map(|c| c.re).collect()).collect();
        if power.iter().flatten().all(|p| *p <= 0.0) {
            return Err(Error::UndefinedCorrelation("series has zero wavelet power".into()));
        }
        Ok(power)
    }

    fn field(&self, values: RealGrid, phase: Option<RealGrid>, clamped: usize, undefined: usize) -> CoherenceField {
        let periods = self.plan.periods();
        let coi = cone_of_influence(self.plan.len(), *periods.last().unwrap());
        CoherenceField {
            values,
            phase,
            significance: None,
            scales: self.plan.scales().to_vec(),
            periods,
            coi,
            clamped,
            undefined,
        }
    }

    pub fn coherence(&self, x: &[f64], y: &[f64]) -> Result<CoherenceField> {
        let (wx, wy) = (self.transform(x)?, self.transform(y)?);
        let sxy = self.smoothed_cross(&wx, &wy)?;
        let (sxx, syy) = (self.smoothed_power(&wx)?, self.smoothed_power(&wy)?);
        let mut clamped = 0;
        let mut values = Vec::with_capacity(sxy.len());
        let mut phase = Vec::with_capacity(sxy.len());
        for ((cross, px), py) in sxy.iter().zip(&sxx).zip(&syy) {
            values.push(
                cross
                    .iter()
                    .zip(px.iter().zip(py))
                    .map(|(c, (a, b))| clamp_unit(c.norm_sqr() / (a * b), &mut clamped))
                    .collect(),
            );
            phase.push(cross.iter().map(|c| c.arg()).collect());
        }
        Ok(self.field(values, Some(phase), clamped, 0))
    }

    /// RM²(z | x, y) from complex smoothed coherencies.
    pub fn multiple_coherence(&self, z: &[f64], x: &[f64], y: &[f64]) -> Result<CoherenceField> {
        let (wz, wx, wy) = (self.transform(z)?, self.transform(x)?, self.transform(y)?);
        let (pz, px, py) = (
            self.smoothed_power(&wz)?,
            self.smoothed_power(&wx)?,
            self.smoothed_power(&wy)?,
        );
        let (szx, szy, sxy) = (
            self.smoothed_cross(&wz, &wx)?,
            self.smoothed_cross(&wz, &wy)?,
            self.smoothed_cross(&wx, &wy)?,
        );
        let (mut clamped, mut undefined) = (0, 0);
        let values = (0..pz.len())
            .map(|r| {
                (0..self.plan.len())
                    .map(|t| {
                        let rzx = szx[r][t] / (pz[r][t] * px[r][t]).sqrt();
                        let rzy = szy[r][t] / (pz[r][t] * py[r][t]).sqrt();
                        let rxy = sxy[r][t] / (px[r][t] * py[r][t]).sqrt();
                        let denom = 1.0 - rxy.norm_sqr();
                        if !(denom >= COLLINEAR_EPS) {
                            undefined += 1;
                            return f64::NAN;
                        }
                        let num = rzy.norm_sqr() + rzx.norm_sqr()
                            - 2.0 * (rzy * rzx.conj() * rxy.conj()).re;
                        clamp_unit(num / denom, &mut clamped)
                    })
                    .collect()
            })
            .collect();
        Ok(self.field(values, None, clamped, undefined))
    }
}

fn check_equal_lengths(series: &[&[f64]]) -> Result<usize> {
    let n = series[0].len();
    if series.iter().any(|s| s.len() != n) {
        return Err(Error::InvalidArgument("series lengths differ".into()));
    }
    Ok(n)
}

pub fn wavelet_coherence(x: &[f64], y: &[f64], scales: &[f64]) -> Result<CoherenceField> {
    wavelet_coherence_with(x, y, scales, &SmoothingConfig::default())
}

pub fn wavelet_coherence_with(
    x: &[f64],
    y: &[f64],
    scales: &[f64],
    config: &SmoothingConfig,
) -> Result<CoherenceField> {
    let n = check_equal_lengths(&[x, y])?;
    CoherenceEngine::new(n, scales, config)?.coherence(x, y)
}

pub fn multiple_wavelet_coherence(
    z: &[f64],
    x: &[f64],
    y: &[f64],
    scales: &[f64],
) -> Result<CoherenceField> {
    multiple_wavelet_coherence_with(z, x, y, scales, &SmoothingConfig::default())
}

pub fn multiple_wavelet_coherence_with(
    z: &[f64],
    x: &[f64],
    y: &[f64],
    scales: &[f64],
    config: &SmoothingConfig,
) -> Result<CoherenceField> {
    let n = check_equal_lengths(&[z, x, y])?;
    CoherenceEngine::new(n, scales, config)?.multiple_coherence(z, x, y)
}

pub const MIN_SURROGATES: usize = 100;
const MAX_AR1: f64 = 0.99;

/// Lag-1 autocorrelation of the demeaned series, clamped into (-0.99, 0.99).
/// The flag reports whether clamping happened.
pub fn fit_ar1(x: &[f64]) -> (f64, bool) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let c0: f64 = x.iter().map(|v| (v - m).powi(2)).sum();
    let c1: f64 = x.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
    let phi = if c0 > 0.0 { c1 / c0 } else { 0.0 };
    if phi.abs() >= MAX_AR1 {
        (phi.signum() * MAX_AR1, true)
    } else {
        (phi, false)
    }
}

fn ar1_surrogate(phi: f64, n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let z: f64 = StandardNormal.sample(rng);
    let mut prev = z / (1.0 - phi * phi).sqrt();
    out.push(prev);
    for _ in 1..n {
        let e: f64 = StandardNormal.sample(rng);
        prev = phi * prev + e;
        out.push(prev);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Significance {
    /// Monte-Carlo p-value per cell (NaN where the observed value is undefined).
    pub p_values: RealGrid,
    /// Fitted AR(1) coefficient per input, after clamping.
    pub ar1: Vec<f64>,
    pub n_surrogates: usize,
}

/// Per-scale Monte-Carlo p-values for a bivariate (two inputs) or multiple
/// (three inputs, first is the response) coherence field.
///
/// Each surrogate replaces every input by an independent AR(1) series with the
/// input's lag-1 autocorrelation; the null for a scale pools all surrogate
/// cells of that row inside the cone of influence (the whole row if the cone
/// excludes it). p = (1 + #{null ≥ v}) / (1 + pool size).
pub fn significance_with(
    engine: &CoherenceEngine,
    inputs: &[&[f64]],
    observed: &CoherenceField,
    n_surrogates: usize,
    seeds: &SeedTree,
) -> Result<Significance> {
    if !(2..=3).contains(&inputs.len()) {
        return Err(Error::InvalidArgument("significance needs two or three series".into()));
    }
    if n_surrogates < MIN_SURROGATES {
        return Err(Error::InvalidArgument(format!(
            "{n_surrogates} surrogates; need at least {MIN_SURROGATES}"
        )));
    }
    let n = check_equal_lengths(inputs)?;
    if n != engine.plan.len() || observed.len() != n {
        return Err(Error::InvalidArgument("inputs do not match the engine length".into()));
    }
    let ar1: Vec<f64> = inputs
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let (phi, clamped) = fit_ar1(x);
            if clamped {
                log::warn!("AR(1) fit for input {i} reached |phi| >= {MAX_AR1}; clamped to {phi}");
            }
            phi
        })
        .collect();

    let rows = observed.values.len();
    // per row: the null pool covers cells inside the cone, or the whole row
    let pooled: Vec<Vec<bool>> = (0..rows)
        .map(|r| {
            let inside: Vec<bool> = (0..n).map(|t| observed.inside_coi(t, r)).collect();
            if inside.iter().any(|b| *b) { inside } else { vec![true; n] }
        })
        .collect();
    // observed values sorted ascending per row, defined cells only
    let sorted: Vec<Vec<f64>> = observed
        .values
        .iter()
        .map(|row| {
            let mut v: Vec<f64> = row.iter().copied().filter(|v| !v.is_nan()).collect();
            v.sort_by(f64::total_cmp);
            v
        })
        .collect();

    let stream = seeds.child("surrogates");
    let zero = || (vec![vec![0u64; n + 1]; rows], vec![0u64; rows]);
    let (diffs, pool_sizes) = (0..n_surrogates)
        .into_par_iter()
        .map(|m| -> Result<_> {
            let mut rng = stream.index(m as u64).rng();
            let series: Vec<Vec<f64>> = ar1.iter().map(|phi| ar1_surrogate(*phi, n, &mut rng)).collect();
            let field = if series.len() == 2 {
                engine.coherence(&series[0], &series[1])?
            } else {
                engine.multiple_coherence(&series[0], &series[1], &series[2])?
            };
            let (mut diff, mut sizes) = zero();
            for r in 0..rows {
                for t in 0..n {
                    let u = field.values[r][t];
                    if !pooled[r][t] || u.is_nan() {
                        continue;
                    }
                    // every observed value ≤ u gains one exceedance
                    let k = sorted[r].partition_point(|v| *v <= u);
                    diff[r][0] += 1;
                    diff[r][k] = diff[r][k].wrapping_sub(1);
                    sizes[r] += 1;
                }
            }
            Ok((diff, sizes))
        })
        .try_reduce(zero, |(mut da, mut sa), (db, sb)| {
            for (ra, rb) in da.iter_mut().zip(&db) {
                ra.iter_mut().zip(rb).for_each(|(a, b)| *a = a.wrapping_add(*b));
            }
            sa.iter_mut().zip(&sb).for_each(|(a, b)| *a += b);
            Ok((da, sa))
        })?;

    let p_values = (0..rows)
        .map(|r| {
            // exceedances for the i-th smallest observed value
            let mut running = 0u64;
            let counts: Vec<u64> = diffs[r][..sorted[r].len()]
                .iter()
                .map(|d| {
                    running = running.wrapping_add(*d);
                    running
                })
                .collect();
            observed.values[r]
                .iter()
                .map(|v| {
                    if v.is_nan() {
                        return f64::NAN;
                    }
                    let i = sorted[r].partition_point(|s| s < v);
                    (1 + counts[i]) as f64 / (1 + pool_sizes[r]) as f64
                })
                .collect()
        })
        .collect();
    Ok(Significance {
        p_values,
        ar1,
        n_surrogates,
    })
}

/// Builds an engine with the default smoothing and runs `significance_with`
/// on a freshly computed coherence field.
pub fn significance(
    inputs: &[&[f64]],
    scales: &[f64],
    n_surrogates: usize,
    seed: u64,
) -> Result<Significance> {
    if !(2..=3).contains(&inputs.len()) {
        return Err(Error::InvalidArgument("significance needs two or three series".into()));
    }
    let n = check_equal_lengths(inputs)?;
    let engine = CoherenceEngine::new(n, scales, &SmoothingConfig::default())?;
    let observed = if inputs.len() == 2 {
        engine.coherence(inputs[0], inputs[1])?
    } else {
        engine.multiple_coherence(inputs[0], inputs[1], inputs[2])?
    };
    significance_with(&engine, inputs, &observed, n_surrogates, &SeedTree::new(seed).child("significance"))
}
