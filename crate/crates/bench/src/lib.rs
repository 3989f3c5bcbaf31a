//! Shared inputs for the benchmarks.

use comove_core::ingest::AlignedPanel;
use comove_core::synthetic::planted_inputs;

/// Rupee panel of `n` weeks (Oil, Gold, NSE-Nifty) from the planted generator.
pub fn panel(n: usize) -> AlignedPanel {
    let s = planted_inputs(n, 1);
    let inr = |usd: &[f64]| -> Vec<f64> { usd.iter().zip(&s.usdinr).map(|(a, b)| a * b).collect() };
    AlignedPanel::weekly(vec![
        ("Oil".to_string(), inr(&s.wti_usd)),
        ("Gold".to_string(), inr(&s.gold_usd)),
        ("NSE-Nifty".to_string(), s.nifty.clone()),
    ])
    .expect("valid synthetic panel")
}

/// Length of the full weekly sample the benches are sized for.
pub const WEEKS: usize = 1188;
