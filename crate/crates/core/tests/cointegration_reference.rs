//! Johansen eigenvalues and trace statistics against statsmodels'
//! `coint_johansen(det_order=0)` on a fixed fixture.

use comove_core::cointegration::johansen_trace;
use comove_core::ingest::AlignedPanel;

fn fixture() -> AlignedPanel {
    let text = include_str!("data/johansen_fixture.csv");
    let mut cols = vec![Vec::new(); 3];
    for line in text.lines().skip(1) {
        for (c, v) in cols.iter_mut().zip(line.split(',')) {
            c.push(v.parse::<f64>().unwrap());
        }
    }
    AlignedPanel::weekly(
        ["a", "b", "c"]
            .iter()
            .map(|s| s.to_string())
            .zip(cols)
            .collect(),
    )
    .unwrap()
}

#[test]
fn matches_statsmodels() {
    let p = fixture();
    // (VAR order in levels, eigenvalues, trace statistics, first normalized vector)
    let cases = [
        (
            2,
            [0.023_688_44, 0.016_576_8, 0.009_037_16],
            [14.830_713_61, 7.686_603_42, 2.705_316_45],
            [1.0, -1.496_596_68, -0.244_663_31],
        ),
        (
            3,
            [0.021_798_53, 0.015_893_86, 0.006_300_05],
            [13.181_195_9, 6.635_424_9, 1.877_034_39],
            [1.0, -1.636_676_15, -0.310_883_74],
        ),
    ];
    for (lag, eig, trace, vec0) in cases {
        let r = johansen_trace(&p, lag).unwrap();
        for (a, b) in r.eigenvalues.iter().zip(eig) {
            assert!((a - b).abs() < 1e-7, "lag {lag}: {:?}", r.eigenvalues);
        }
        for (a, b) in r.trace_stats.iter().zip(trace) {
            assert!((a - b).abs() < 1e-6, "lag {lag}: {:?}", r.trace_stats);
        }
        for (a, b) in r.eigenvectors[0].iter().zip(vec0) {
            assert!((a - b).abs() < 1e-6, "lag {lag}: {:?}", r.eigenvectors[0]);
        }
    }
}
