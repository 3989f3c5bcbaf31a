use std::path::{Path, PathBuf};

use clap::Args;
use comove_core::cointegration::{johansen_trace, portfolio_series};
use comove_core::cwt::{significance_with, CoherenceEngine, CoherenceField};
use comove_core::ingest::{diff, AlignedPanel};
use comove_core::pipeline::{load_panel, run_pipeline, slug, RunConfig, GOLD, NIFTY, OIL};
use comove_core::report::{render_tables, AnovaSection, Format, GrangerSection, ReportBundle, Section, UnitRootEntry};
use comove_core::rng::SeedTree;
use comove_core::spectral::{frequency_scan_with, index_grid};
use comove_core::stats::{ols_anova, windowed_correlations};
use comove_core::unitroot::{adf_test, adf_test_fixed_lags, kpss_test, pp_test, TrendSpec, UnitRootTest};
use comove_core::vargranger::scale_granger_matrix;
use comove_core::wavelets::{haar_atrous_decompose_with, Boundary};

use crate::config::{self, FileConfig};
use crate::{CliError, Cli, Command, Global, DEFAULT_OUT_DIR};

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Wavelet scale count J, 1 to 10.
    #[arg(short = 'J', long)]
    levels: Option<usize>,
    /// Surrogates per coherence significance test (at least 100).
    #[arg(long)]
    surrogates: Option<usize>,
    /// Johansen VAR order in levels.
    #[arg(long)]
    lag_order: Option<usize>,
    /// Lag order of the scale-wise Granger tests.
    #[arg(long)]
    granger_lag: Option<usize>,
    /// Trend specification (none, constant, constant_and_linear); repeatable.
    #[arg(long)]
    trend: Vec<String>,
    /// Correlation window START:END in rows, half open; repeatable.
    #[arg(long, value_parser = parse_window)]
    window: Vec<(usize, usize)>,
    /// Largest lag the ADF AIC search considers.
    #[arg(long)]
    adf_max_lags: Option<usize>,
    /// Fixed ADF lags for one row, LABEL=N (e.g. ΔOil=9 or constant/Oil=10); repeatable.
    #[arg(long, value_parser = parse_assignment)]
    adf_lag: Vec<(String, usize)>,
    /// Phillips-Perron Newey-West bandwidth.
    #[arg(long)]
    pp_bandwidth: Option<usize>,
    /// KPSS Newey-West bandwidth.
    #[arg(long)]
    kpss_bandwidth: Option<usize>,
    /// Wavelet boundary rule (reflect or periodic).
    #[arg(long)]
    boundary: Option<String>,
    /// Subtract the mean before the frequency scan.
    #[arg(long)]
    demean: bool,
    /// Largest Fourier bin index scanned.
    #[arg(long)]
    max_index: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CorrArgs {
    /// Window START:END in rows, half open; repeatable.
    #[arg(long, value_parser = parse_window)]
    window: Vec<(usize, usize)>,
}

#[derive(Debug, Args)]
pub struct AnovaArgs {
    /// Dependent series (nifty, gold or oil).
    #[arg(long, default_value = "nifty")]
    dependent: String,
    /// Regressor; repeatable [default: oil and gold].
    #[arg(long)]
    regressor: Vec<String>,
}

#[derive(Debug, Args)]
pub struct UnitRootArgs {
    /// none, constant or constant_and_linear; repeatable [default: all].
    #[arg(long)]
    trend: Vec<String>,
    /// adf, pp or kpss; repeatable [default: all].
    #[arg(long)]
    test: Vec<String>,
    /// Series; repeatable [default: all].
    #[arg(long)]
    column: Vec<String>,
    /// Also test first differences.
    #[arg(long)]
    differences: bool,
    /// Fixed ADF lag count instead of the AIC search.
    #[arg(long)]
    lags: Option<usize>,
    /// Newey-West bandwidth for PP and KPSS.
    #[arg(long)]
    bandwidth: Option<usize>,
}

#[derive(Debug, Args)]
pub struct JohansenArgs {
    /// VAR order in levels.
    #[arg(long)]
    lag_order: Option<usize>,
}

#[derive(Debug, Args)]
pub struct DwtArgs {
    /// Scale count J, 1 to 10.
    #[arg(short = 'J', long)]
    levels: Option<usize>,
    /// reflect or periodic.
    #[arg(long)]
    boundary: Option<String>,
    /// Series; repeatable [default: all].
    #[arg(long)]
    column: Vec<String>,
}

#[derive(Debug, Args)]
pub struct GrangerArgs {
    /// Scale count J, 1 to 10.
    #[arg(short = 'J', long)]
    levels: Option<usize>,
    /// reflect or periodic.
    #[arg(long)]
    boundary: Option<String>,
    /// VAR lag order.
    #[arg(long)]
    lag: Option<usize>,
    /// Pair A,B tested both ways; repeatable [default: oil,nifty and gold,nifty].
    #[arg(long)]
    pair: Vec<String>,
}

#[derive(Debug, Args)]
pub struct FourierArgs {
    /// Series; repeatable [default: all].
    #[arg(long)]
    column: Vec<String>,
    /// Largest Fourier bin index scanned.
    #[arg(long)]
    max_index: Option<usize>,
    /// Subtract the mean first.
    #[arg(long)]
    demean: bool,
}

#[derive(Debug, Args)]
pub struct CoherenceArgs {
    /// Pair A,B; repeatable [default: nifty,gold and nifty,oil].
    #[arg(long)]
    pair: Vec<String>,
    /// Surrogates for the significance test (at least 100).
    #[arg(long)]
    surrogates: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MwcArgs {
    /// Response series.
    #[arg(long, default_value = "nifty")]
    response: String,
    /// The two predictors, A,B.
    #[arg(long, default_value = "gold,oil")]
    predictors: String,
    /// Surrogates for the significance test (at least 100).
    #[arg(long)]
    surrogates: Option<usize>,
}

fn parse_window(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(':').ok_or("expected START:END")?;
    let a = a.trim().parse::<usize>().map_err(|e| e.to_string())?;
    let b = b.trim().parse::<usize>().map_err(|e| e.to_string())?;
    Ok((a, b))
}

fn parse_assignment(s: &str) -> Result<(String, usize), String> {
    let (k, v) = s.split_once('=').ok_or("expected LABEL=N")?;
    Ok((k.trim().to_string(), v.trim().parse::<usize>().map_err(|e| e.to_string())?))
}

/// Panel column for a user-facing series name.
fn series(name: &str) -> Result<&'static str, CliError> {
    match name.trim().to_ascii_lowercase().as_str() {
        "oil" | "crude" | "wti" => Ok(OIL),
        "gold" => Ok(GOLD),
        "nifty" | "nse-nifty" | "nse_nifty" => Ok(NIFTY),
        other => Err(CliError::config(format!("unknown series `{other}` (use nifty, gold or oil)"))),
    }
}

fn pair(s: &str) -> Result<(String, String), CliError> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| CliError::config(format!("pair `{s}` should look like A,B")))?;
    Ok((series(a)?.to_string(), series(b)?.to_string()))
}

fn columns(names: &[String], panel: &AlignedPanel) -> Result<Vec<String>, CliError> {
    if names.is_empty() {
        return Ok(panel.names().to_vec());
    }
    names.iter().map(|n| series(n).map(str::to_string)).collect()
}

fn base_config(g: &Global) -> Result<RunConfig, CliError> {
    let file = match &g.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let out = g
        .out
        .clone()
        .or_else(|| file.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    let mut cfg = config::build(
        file,
        out,
        [g.nifty.clone(), g.gold_usd.clone(), g.wti_usd.clone(), g.usdinr.clone()],
    )?;
    if let Some(v) = &g.date_column {
        cfg.input.csv.date_column = v.clone();
    }
    if let Some(v) = &g.date_format {
        cfg.input.csv.date_format = v.clone();
    }
    if let Some(v) = g.seed {
        cfg.seed = v;
    }
    if !g.format.is_empty() {
        cfg.formats = g.format.iter().map(|f| f.parse::<Format>()).collect::<Result<_, _>>()?;
    }
    Ok(cfg)
}

fn parse_trends(v: &[String]) -> Result<Vec<TrendSpec>, CliError> {
    v.iter().map(|s| s.parse::<TrendSpec>().map_err(CliError::from)).collect()
}

fn set_boundary(cfg: &mut RunConfig, b: &Option<String>) -> Result<(), CliError> {
    if let Some(b) = b {
        cfg.boundary = b.parse::<Boundary>()?;
    }
    Ok(())
}

pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    let mut cfg = base_config(&cli.global)?;
    match cli.command {
        Command::Run(a) => run(cfg, a),
        Command::Corr(a) => {
            if !a.window.is_empty() {
                cfg.windows = a.window;
            }
            stage(&cfg, |panel, b| {
                b.correlation = Some(windowed_correlations(panel, &cfg.windows)?);
                Ok(vec![Section::Correlation])
            })
        }
        Command::Anova(a) => {
            cfg.anova_dependent = series(&a.dependent)?.to_string();
            if !a.regressor.is_empty() {
                cfg.anova_regressors = a.regressor.iter().map(|r| series(r).map(str::to_string)).collect::<Result<_, _>>()?;
            }
            stage(&cfg, |panel, b| {
                let y = panel.column(&cfg.anova_dependent)?;
                let xs = cfg.anova_regressors.iter().map(|r| panel.column(r)).collect::<Result<Vec<_>, _>>()?;
                b.anova = Some(AnovaSection {
                    dependent: cfg.anova_dependent.clone(),
                    regressors: cfg.anova_regressors.clone(),
                    report: ols_anova(y, &xs)?,
                });
                Ok(vec![Section::Anova])
            })
        }
        Command::Unitroot(a) => unit_root(cfg, a),
        Command::Johansen(a) => {
            if let Some(k) = a.lag_order {
                cfg.johansen_lag_order = k;
            }
            let root = cfg.out_dir.clone();
            stage(&cfg, |panel, b| {
                let report = johansen_trace(panel, cfg.johansen_lag_order)?;
                let portfolio = portfolio_series(panel, &report.eigenvectors[0])?;
                let mut csv = String::from("date,value\n");
                for (d, v) in panel.dates().iter().zip(&portfolio) {
                    csv.push_str(&format!("{},{v}\n", d.format("%Y-%m-%d")));
                }
                write(&root, "johansen/portfolio.csv", csv.as_bytes())?;
                b.johansen = Some(report);
                Ok(vec![Section::Johansen])
            })
        }
        Command::Dwt(a) => {
            if let Some(j) = a.levels {
                cfg.levels = j;
            }
            set_boundary(&mut cfg, &a.boundary)?;
            cfg.validate()?;
            let panel = load_panel(&cfg.input)?;
            for name in columns(&a.column, &panel)? {
                let d = haar_atrous_decompose_with(panel.column(&name)?, cfg.levels, cfg.boundary)?;
                let mut buf = Vec::new();
                d.write_csv(&mut buf).map_err(|e| comove_core::Error::io(&cfg.out_dir, e))?;
                let rel = format!("dwt/{}.csv", slug(&name));
                write(&cfg.out_dir, &rel, &buf)?;
                println!("{}", cfg.out_dir.join(rel).display());
            }
            Ok(())
        }
        Command::Granger(a) => {
            if let Some(j) = a.levels {
                cfg.levels = j;
            }
            if let Some(p) = a.lag {
                cfg.granger_lag = p;
            }
            set_boundary(&mut cfg, &a.boundary)?;
            if !a.pair.is_empty() {
                cfg.granger_pairs = a.pair.iter().map(|p| pair(p)).collect::<Result<_, _>>()?;
            }
            stage(&cfg, |panel, b| {
                let decompositions = panel
                    .names()
                    .iter()
                    .zip(panel.columns())
                    .map(|(n, c)| Ok((n.clone(), haar_atrous_decompose_with(c, cfg.levels, cfg.boundary)?)))
                    .collect::<Result<Vec<_>, comove_core::Error>>()?;
                b.granger = Some(GrangerSection {
                    lag_order: cfg.granger_lag,
                    tables: scale_granger_matrix(&decompositions, &cfg.granger_pairs, cfg.granger_lag)?,
                });
                Ok(vec![Section::Granger])
            })
        }
        Command::Fourier(a) => {
            if let Some(m) = a.max_index {
                cfg.fourier_max_index = m;
            }
            cfg.demean |= a.demean;
            let panel = load_panel(&cfg.input)?;
            let grid = index_grid(panel.n_rows(), cfg.fourier_max_index);
            for name in columns(&a.column, &panel)? {
                let p = frequency_scan_with(panel.column(&name)?, &grid, cfg.demean)?;
                let mut buf = Vec::new();
                p.write_csv(&mut buf).map_err(|e| comove_core::Error::io(&cfg.out_dir, e))?;
                let rel = format!("fourier/{}.csv", slug(&name));
                write(&cfg.out_dir, &rel, &buf)?;
                let peak = p.peak();
                println!(
                    "{}: peak at {} cycles/week, {} points above 0.5",
                    cfg.out_dir.join(rel).display(),
                    p.frequencies()[peak],
                    p.above_nyquist()
                );
            }
            Ok(())
        }
        Command::Coherence(a) => {
            if let Some(m) = a.surrogates {
                cfg.surrogates = m;
            }
            let pairs = if a.pair.is_empty() {
                cfg.coherence_pairs.clone()
            } else {
                a.pair.iter().map(|p| pair(p)).collect::<Result<_, _>>()?
            };
            let jobs: Vec<Vec<String>> = pairs.into_iter().map(|(x, y)| vec![x, y]).collect();
            coherence(cfg, jobs, "")
        }
        Command::Mwc(a) => {
            if let Some(m) = a.surrogates {
                cfg.surrogates = m;
            }
            let (x, y) = pair(&a.predictors)?;
            coherence(cfg, vec![vec![series(&a.response)?.to_string(), x, y]], "mwc_")
        }
    }
}

fn write(root: &Path, rel: &str, bytes: &[u8]) -> Result<(), comove_core::Error> {
    let path = root.join(rel);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| comove_core::Error::io(parent, e))?;
    }
    std::fs::write(&path, bytes).map_err(|e| comove_core::Error::io(&path, e))?;
    Ok(())
}

/// Loads the panel, lets `f` fill part of a bundle, writes those tables under
/// `<out>/tables` and echoes the Markdown ones.
fn stage(
    cfg: &RunConfig,
    f: impl FnOnce(&AlignedPanel, &mut ReportBundle) -> Result<Vec<Section>, comove_core::Error>,
) -> Result<(), CliError> {
    cfg.validate()?;
    let panel = load_panel(&cfg.input)?;
    let mut bundle = ReportBundle::default();
    let sections = f(&panel, &mut bundle)?;
    for &format in &cfg.formats {
        for path in render_tables(&bundle, format, &sections, &cfg.out_dir.join("tables"))? {
            if format == Format::Markdown {
                let text = std::fs::read_to_string(&path).map_err(|e| comove_core::Error::io(&path, e))?;
                println!("{text}");
            } else {
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

fn run(mut cfg: RunConfig, a: RunArgs) -> Result<(), CliError> {
    if let Some(v) = a.levels {
        cfg.levels = v;
    }
    if let Some(v) = a.surrogates {
        cfg.surrogates = v;
    }
    if let Some(v) = a.lag_order {
        cfg.johansen_lag_order = v;
    }
    if let Some(v) = a.granger_lag {
        cfg.granger_lag = v;
    }
    if !a.trend.is_empty() {
        cfg.trends = parse_trends(&a.trend)?;
    }
    if !a.window.is_empty() {
        cfg.windows = a.window;
    }
    if a.adf_max_lags.is_some() {
        cfg.adf_max_lags = a.adf_max_lags;
    }
    cfg.adf_lags.extend(a.adf_lag);
    if a.pp_bandwidth.is_some() {
        cfg.pp_bandwidth = a.pp_bandwidth;
    }
    if a.kpss_bandwidth.is_some() {
        cfg.kpss_bandwidth = a.kpss_bandwidth;
    }
    set_boundary(&mut cfg, &a.boundary)?;
    cfg.demean |= a.demean;
    if let Some(v) = a.max_index {
        cfg.fourier_max_index = v;
    }
    let out = run_pipeline(&cfg)?;
    println!(
        "{} weeks, {} artifacts, manifest {}",
        out.panel.n_rows(),
        out.manifest.artifacts.len(),
        out.manifest_path.display()
    );
    Ok(())
}

fn unit_root(cfg: RunConfig, a: UnitRootArgs) -> Result<(), CliError> {
    let trends = if a.trend.is_empty() { cfg.trends.clone() } else { parse_trends(&a.trend)? };
    let tests: Vec<UnitRootTest> = if a.test.is_empty() {
        vec![UnitRootTest::Adf, UnitRootTest::PhillipsPerron, UnitRootTest::Kpss]
    } else {
        a.test.iter().map(|t| t.parse::<UnitRootTest>()).collect::<Result<_, _>>()?
    };
    for (t, tr) in tests.iter().flat_map(|t| trends.iter().map(move |tr| (t, tr))) {
        if *t == UnitRootTest::Kpss && *tr == TrendSpec::None {
            return Err(CliError::config("KPSS needs trend constant or constant_and_linear"));
        }
    }
    let bandwidth = a.bandwidth;
    let wanted: Vec<String> = a.column.iter().map(|c| series(c).map(str::to_string)).collect::<Result<_, _>>()?;
    stage(&cfg, |panel, b| {
        let mut entries = Vec::new();
        let names = if wanted.is_empty() { panel.names().to_vec() } else { wanted };
        for name in names {
            let level = panel.column(&name)?.to_vec();
            let variants = if a.differences { vec![false, true] } else { vec![false] };
            for differenced in variants {
                let x = if differenced { diff(&level) } else { level.clone() };
                for &trend in &trends {
                    for &test in &tests {
                        let report = match test {
                            UnitRootTest::Adf => match a.lags {
                                Some(l) => adf_test_fixed_lags(&x, trend, l)?,
                                None => adf_test(&x, trend, cfg.adf_max_lags)?,
                            },
                            UnitRootTest::PhillipsPerron => pp_test(&x, trend, bandwidth.or(cfg.pp_bandwidth))?,
                            UnitRootTest::Kpss => kpss_test(&x, trend, bandwidth.or(cfg.kpss_bandwidth))?,
                        };
                        entries.push(UnitRootEntry {
                            series: name.clone(),
                            differenced,
                            report,
                        });
                    }
                }
            }
        }
        b.unit_root = Some(entries);
        Ok(vec![Section::UnitRoot])
    })
}

fn write_field(root: &Path, stem: &str, field: &CoherenceField) -> Result<(), CliError> {
    let io = |e| comove_core::Error::io(root, e);
    let mut csv = Vec::new();
    field.write_csv(&mut csv).map_err(io)?;
    let mut pgm = Vec::new();
    field.write_pgm(&mut pgm).map_err(io)?;
    let mut pv = Vec::new();
    field.write_significance_csv(&mut pv).map_err(io)?;
    for (rel, bytes) in [
        (format!("coherence/{stem}.csv"), csv),
        (format!("coherence/{stem}.pgm"), pgm),
        (format!("coherence/{stem}_pvalues.csv"), pv),
    ] {
        write(root, &rel, &bytes)?;
        println!("{}", root.join(rel).display());
    }
    Ok(())
}

/// Each job is [x, y] for coherence or [response, x, y] for multiple coherence.
fn coherence(cfg: RunConfig, jobs: Vec<Vec<String>>, prefix: &str) -> Result<(), CliError> {
    cfg.validate()?;
    let panel = load_panel(&cfg.input)?;
    let n = panel.n_rows();
    let engine = CoherenceEngine::new(n, &cfg.scale_grid.scales(n), &cfg.smoothing)?;
    let seeds = SeedTree::new(cfg.seed).child("coherence");
    for job in jobs {
        let inputs = job.iter().map(|c| panel.column(c)).collect::<Result<Vec<_>, _>>()?;
        let stem = format!("{prefix}{}", job.iter().map(|c| slug(c)).collect::<Vec<_>>().join("_"));
        let mut field = if inputs.len() == 2 {
            engine.coherence(inputs[0], inputs[1])?
        } else {
            engine.multiple_coherence(inputs[0], inputs[1], inputs[2])?
        };
        let sig = significance_with(&engine, &inputs, &field, cfg.surrogates, &seeds.child(&stem))?;
        field.set_significance(sig.p_values);
        write_field(&cfg.out_dir, &stem, &field)?;
    }
    Ok(())
}
