//! Rendered tables for a fixed hand-built bundle are compared byte for byte
//! with checked-in files. Set UPDATE_GOLDEN=1 to rewrite them.

use std::path::PathBuf;

use comove_core::cointegration::JohansenReport;
use comove_core::report::{
    render, render_tables, AnovaSection, Format, GrangerSection, ReportBundle, Section, UnitRootEntry,
};
use comove_core::stats::{PairCorrelation, RegressionReport, WindowCorrelation};
use comove_core::unitroot::{Level, PBound, TrendSpec, UnitRootReport, UnitRootTest};
use comove_core::vargranger::{GrangerReport, ScaleGrangerTable};
use comove_core::Error;

fn window(start: usize, end: usize, r: [Option<f64>; 3]) -> WindowCorrelation {
    let names = [("Nifty", "Gold"), ("Gold", "Oil"), ("Nifty", "Oil")];
    WindowCorrelation {
        start,
        end,
        pairs: names
            .iter()
            .zip(r)
            .map(|((a, b), r)| PairCorrelation {
                first: a.to_string(),
                second: b.to_string(),
                r,
            })
            .collect(),
    }
}

fn ur(test: UnitRootTest, trend: TrendSpec, stat: f64, p: f64, bound: PBound, lags: usize) -> UnitRootReport {
    let cv = match test {
        UnitRootTest::Kpss => [(Level::Ten, 0.347), (Level::Five, 0.463), (Level::One, 0.739)],
        _ => [(Level::Ten, -2.5683), (Level::Five, -2.8642), (Level::One, -3.4364)],
    };
    UnitRootReport {
        test,
        statistic: stat,
        p_value: p,
        p_bound: bound,
        lags,
        trend,
        nobs: 1149,
        critical_values: cv,
        reject_at: if p < 0.01 { vec![Level::Ten, Level::Five, Level::One] } else { vec![] },
    }
}

fn entry(series: &str, differenced: bool, report: UnitRootReport) -> UnitRootEntry {
    UnitRootEntry {
        series: series.into(),
        differenced,
        report,
    }
}

fn granger(dep: &str, ind: &str, f: f64, p: f64) -> GrangerReport {
    GrangerReport {
        dependent: dep.into(),
        independent: ind.into(),
        lag_order: 3,
        f_statistic: f,
        p_value: p,
        df_num: 3,
        df_den: 1140,
        ssr_restricted: 1.0,
        ssr_unrestricted: 0.9,
    }
}

fn bundle() -> ReportBundle {
    use TrendSpec::{Constant, ConstantAndLinear};
    use UnitRootTest::*;
    // deliberately shuffled: rendering must restore level-before-difference order
    let unit_root = vec![
        entry("Oil", true, ur(Adf, Constant, -22.494, 0.0, PBound::Exact, 2)),
        entry("Gold", false, ur(Adf, Constant, -0.3851, 0.9095, PBound::Exact, 1)),
        entry("Oil", false, ur(Adf, Constant, -2.0174, 0.2794, PBound::Exact, 3)),
        entry("Gold", true, ur(Adf, Constant, -35.12, 0.0, PBound::Exact, 0)),
        entry("Oil", false, ur(Kpss, Constant, 2.1, 0.01, PBound::AtMost, 23)),
        entry("Oil", true, ur(Kpss, Constant, 0.05, 0.1, PBound::AtLeast, 12)),
        entry("Oil", false, ur(Adf, TrendSpec::None, 0.51234, 0.8271, PBound::Exact, 3)),
        entry("Oil", false, ur(PhillipsPerron, ConstantAndLinear, -3.1, 0.1012, PBound::Exact, 7)),
    ];
    let table = |scale: usize, rows: Vec<GrangerReport>| ScaleGrangerTable {
        scale,
        band: (1 << scale, 1 << (scale + 1)),
        reports: rows,
    };
    ReportBundle {
        correlation: Some(vec![
            window(0, 200, [Some(0.8840319), Some(-0.1234567), Some(0.5)]),
            window(200, 400, [Some(-0.02), None, Some(1.0)]),
        ]),
        anova: Some(AnovaSection {
            dependent: "Nifty".into(),
            regressors: vec!["Oil".into(), "Gold".into()],
            report: RegressionReport {
                intercept: 1234.5678,
                slopes: vec![0.125, 1.5e-7],
                std_errors: vec![12.0, 0.01, 2e-8],
                t_values: vec![102.88, 12.5, 7.5],
                t_p_values: vec![0.0, 1.2e-33, 0.00012345],
                residuals: vec![],
                nobs: 1150,
                df_model: 2,
                df_resid: 1147,
                ssr: 1.0,
                ess: 2.0,
                r_squared: 0.6666667,
                adj_r_squared: 0.6660854,
                f_statistic: 1147.0,
                f_p_value: 3.4e-280,
                durbin_watson: Some(0.0421),
            },
        }),
        unit_root: Some(unit_root),
        johansen: Some(JohansenReport {
            names: vec!["Oil".into(), "Gold".into(), "Nifty".into()],
            eigenvalues: vec![0.03, 0.01, 0.002],
            trace_stats: vec![50.1, 14.2, 2.3],
            critical_values: vec![
                [(Level::Ten, 32.0), (Level::Five, 34.91), (Level::One, 41.07)],
                [(Level::Ten, 17.85), (Level::Five, 19.96), (Level::One, 24.6)],
                [(Level::Ten, 7.52), (Level::Five, 9.24), (Level::One, 12.97)],
            ],
            eigenvectors: vec![vec![1.0, -2.5, 0.125], vec![1.0, 0.5, -3.0], vec![1.0, 7.0, 0.0]],
            lag_order: 2,
            nobs: 1148,
        }),
        granger: Some(GrangerSection {
            lag_order: 3,
            tables: vec![
                table(1, vec![granger("Crude", "Nifty", 4.1512, 0.006325), granger("Nifty", "Crude", 0.7, 0.55)]),
                table(2, vec![granger("Crude", "Nifty", 2.3, 0.0712), granger("Nifty", "Crude", 25.0, 1e-15)]),
            ],
        }),
        periodogram: Some(vec!["fourier/nifty.csv".into()]),
        coherence: Some(vec!["coherence/nifty_gold.csv".into(), "coherence/mwc_nifty.pgm".into()]),
    }
}

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

#[test]
fn rendered_tables_match_golden_files() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let b = bundle();
    for format in [Format::Markdown, Format::Csv] {
        for f in render(&b, format, &Section::ALL).unwrap() {
            let path = golden_dir().join(&f.name);
            if update {
                std::fs::create_dir_all(golden_dir()).unwrap();
                std::fs::write(&path, &f.contents).unwrap();
                continue;
            }
            let want = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert_eq!(f.contents, want, "{}", f.name);
        }
    }
}

#[test]
fn one_file_per_trend_with_level_rows_first() {
    let files = render(&bundle(), Format::Csv, &[Section::UnitRoot]).unwrap();
    let names: Vec<&str> = files.iter().map(|f| f.name.as_str()).collect();
    assert_eq!(
        names,
        ["unitroot_constant.csv", "unitroot_none.csv", "unitroot_constant_and_linear.csv"]
    );
    let adf_rows: Vec<&str> = files[0]
        .contents
        .lines()
        .filter(|l| l.starts_with("ADF,"))
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    assert_eq!(adf_rows, ["Oil", "ΔOil", "Gold", "ΔGold"]);
}

#[test]
fn written_files_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let b = bundle();
    let first = render_tables(&b, Format::Markdown, &Section::ALL, &dir.path().join("a")).unwrap();
    let second = render_tables(&b, Format::Markdown, &Section::ALL, &dir.path().join("b")).unwrap();
    assert_eq!(first.len(), second.len());
    for (a, b) in first.iter().zip(&second) {
        assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    }
}

#[test]
fn partial_bundle_names_absent_sections() {
    let b = ReportBundle {
        granger: None,
        coherence: None,
        ..bundle()
    };
    match render(&b, Format::Markdown, &Section::ALL) {
        Err(Error::Incomplete(missing)) => assert_eq!(missing, ["granger", "coherence"]),
        other => panic!("{other:?}"),
    }
    assert!(render(&b, Format::Markdown, &[Section::Johansen]).is_ok());
}
