use comove_core::rng::SeedTree;
use comove_core::spectral::{fourier_grid, frequency_scan, frequency_scan_with, index_grid};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn sinusoid_peak_dominates_median() {
    let x: Vec<f64> = (0..512)
        .map(|t| (std::f64::consts::TAU * t as f64 / 16.0).sin())
        .collect();
    let grid = index_grid(512, 256);
    let p = frequency_scan(&x, &grid).unwrap();
    assert_eq!(p.frequencies()[p.peak()], 1.0 / 16.0);
    let mut sorted = p.power().to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    assert!(p.power()[p.peak()] >= 100.0 * median);
}

#[test]
fn off_grid_scan_matches_direct_sum() {
    let tree = SeedTree::new(8).child("spectral-oracle");
    for i in 0..50 {
        let mut rng = tree.index(i).rng();
        let n = rng.random_range(4..300);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let grid: Vec<f64> = (0..20).map(|_| rng.random_range(0.0..3.0)).collect();
        let p = frequency_scan(&x, &grid).unwrap();
        for (f, got) in grid.iter().zip(p.power()) {
            let (re, im) = x.iter().enumerate().fold((0.0, 0.0), |(re, im), (t, v)| {
                let a = std::f64::consts::TAU * f * t as f64;
                (re + v * a.cos(), im + v * a.sin())
            });
            let want = (re * re + im * im) / n as f64;
            assert!((got - want).abs() <= 1e-8 * want.max(1.0), "{got} vs {want}");
        }
    }
}

proptest! {
    #[test]
    fn parseval_on_full_grid(x in prop::collection::vec(-1e3f64..1e3, 4..256), demean: bool) {
        let n = x.len();
        let p = frequency_scan_with(&x, &fourier_grid(n), demean).unwrap();
        let m = if demean { x.iter().sum::<f64>() / n as f64 } else { 0.0 };
        let mean_square = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n as f64;
        let mean_power = p.power().iter().sum::<f64>() / n as f64;
        prop_assert!((mean_power - mean_square).abs() <= 1e-8 * mean_square.max(1e-300) + 1e-12);
    }

    #[test]
    fn time_reversal_invariance(x in prop::collection::vec(-1e3f64..1e3, 4..128),
                                grid in prop::collection::vec(0.0f64..2.0, 1..30)) {
        let rev: Vec<f64> = x.iter().rev().copied().collect();
        let a = frequency_scan(&x, &grid).unwrap();
        let b = frequency_scan(&rev, &grid).unwrap();
        for (u, v) in a.power().iter().zip(b.power()) {
            prop_assert!((u - v).abs() <= 1e-8 * u.max(1.0));
            prop_assert!(*u >= 0.0);
        }
    }
}
