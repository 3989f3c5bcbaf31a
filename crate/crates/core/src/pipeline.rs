//! End-to-end run: ingest, time-domain statistics, unit roots, cointegration,
//! scale-wise causality, frequency scan and wavelet coherence, with every
//! artifact hashed into a manifest.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::cointegration::{johansen_trace, portfolio_series};
use crate::cwt::{significance_with, CoherenceEngine, CoherenceField, ScaleGrid, SmoothingConfig, MIN_SURROGATES};
use crate::error::{Error, ErrorCategory, Result};
use crate::ingest::{align_panel, convert_currency, diff, load_csv_with, AlignedPanel, CsvOptions};
use crate::report::{render, AnovaSection, Format, GrangerSection, ReportBundle, UnitRootEntry};
use crate::rng::SeedTree;
use crate::spectral::{frequency_scan_with, index_grid};
use crate::stats::{ols_anova, windowed_correlations};
use crate::unitroot::{adf_test, adf_test_fixed_lags, kpss_test, pp_test, TrendSpec, UnitRootTest};
use crate::vargranger::{scale_granger_matrix, DEFAULT_GRANGER_LAGS};
use crate::wavelets::{haar_atrous_decompose_with, Boundary, DEFAULT_LEVELS};

pub const OIL: &str = "Oil";
pub const GOLD: &str = "Gold";
pub const NIFTY: &str = "NSE-Nifty";

pub const MAX_LEVELS: usize = 10;
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq)]
pub struct InputPaths {
    pub nifty: PathBuf,
    pub gold_usd: PathBuf,
    pub wti_usd: PathBuf,
    pub usdinr: PathBuf,
}

/// Value column read from each input file.
#[derive(Debug, Clone, PartialEq)]
pub struct InputColumns {
    pub nifty: String,
    pub gold_usd: String,
    pub wti_usd: String,
    pub usdinr: String,
}

impl Default for InputColumns {
    fn default() -> Self {
        let close = || "close".to_string();
        InputColumns {
            nifty: close(),
            gold_usd: close(),
            wti_usd: close(),
            usdinr: close(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InputConfig {
    pub paths: InputPaths,
    pub columns: InputColumns,
    pub csv: CsvOptions,
}

impl InputConfig {
    pub fn new(paths: InputPaths) -> Self {
        InputConfig {
            paths,
            columns: InputColumns::default(),
            csv: CsvOptions::default(),
        }
    }
}

/// Loads the four files, keeps the weeks they share and converts gold and
/// crude to rupees. Columns come out as Oil, Gold, NSE-Nifty.
pub fn load_panel(input: &InputConfig) -> Result<AlignedPanel> {
    let p = &input.paths;
    let c = &input.columns;
    let wti = load_csv_with(&p.wti_usd, &c.wti_usd, &input.csv)?.renamed(OIL);
    let gold = load_csv_with(&p.gold_usd, &c.gold_usd, &input.csv)?.renamed(GOLD);
    let nifty = load_csv_with(&p.nifty, &c.nifty, &input.csv)?.renamed(NIFTY);
    let fx = load_csv_with(&p.usdinr, &c.usdinr, &input.csv)?.renamed("USDINR");
    let raw = align_panel(&[wti, gold, nifty, fx])?.to_series();
    let oil = convert_currency(&raw[0], &raw[3])?;
    let gold = convert_currency(&raw[1], &raw[3])?;
    let panel = align_panel(&[oil, gold, raw[2].clone()])?;
    log::info!("aligned panel: {} weeks", panel.n_rows());
    Ok(panel)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: InputConfig,
    pub out_dir: PathBuf,
    pub seed: u64,
    /// Half-open row ranges; ranges starting past the last row are dropped.
    pub windows: Vec<(usize, usize)>,
    pub anova_dependent: String,
    pub anova_regressors: Vec<String>,
    pub trends: Vec<TrendSpec>,
    pub adf_max_lags: Option<usize>,
    /// Fixed ADF lag counts keyed by row label (`Oil`, `ΔOil`) or by
    /// `trend/label` (`constant/ΔOil`); the trend-specific key wins.
    pub adf_lags: BTreeMap<String, usize>,
    pub pp_bandwidth: Option<usize>,
    pub kpss_bandwidth: Option<usize>,
    pub johansen_lag_order: usize,
    pub levels: usize,
    pub boundary: Boundary,
    pub granger_lag: usize,
    /// Each pair is tested in both directions, first name as dependent first.
    pub granger_pairs: Vec<(String, String)>,
    pub fourier_max_index: usize,
    pub demean: bool,
    pub scale_grid: ScaleGrid,
    pub smoothing: SmoothingConfig,
    pub coherence_pairs: Vec<(String, String)>,
    /// Response first, then the two predictors.
    pub mwc: Vec<[String; 3]>,
    pub surrogates: usize,
    pub formats: Vec<Format>,
}

impl RunConfig {
    pub fn new(input: InputConfig, out_dir: impl Into<PathBuf>) -> Self {
        let s = |v: &str| v.to_string();
        RunConfig {
            input,
            out_dir: out_dir.into(),
            seed: 42,
            windows: vec![(0, 200), (200, 700), (700, 1200)],
            anova_dependent: s(NIFTY),
            anova_regressors: vec![s(OIL), s(GOLD)],
            trends: TrendSpec::ALL.to_vec(),
            adf_max_lags: None,
            adf_lags: BTreeMap::new(),
            pp_bandwidth: None,
            kpss_bandwidth: None,
            johansen_lag_order: 2,
            levels: DEFAULT_LEVELS,
            boundary: Boundary::Reflect,
            granger_lag: DEFAULT_GRANGER_LAGS,
            granger_pairs: vec![(s(OIL), s(NIFTY)), (s(GOLD), s(NIFTY))],
            fourier_max_index: 500,
            demean: false,
            scale_grid: ScaleGrid::default(),
            smoothing: SmoothingConfig::default(),
            coherence_pairs: vec![(s(NIFTY), s(GOLD)), (s(NIFTY), s(OIL))],
            mwc: vec![[s(NIFTY), s(GOLD), s(OIL)]],
            surrogates: MIN_SURROGATES,
            formats: vec![Format::Markdown, Format::Csv],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_LEVELS).contains(&self.levels) {
            return Err(Error::InvalidArgument(format!(
                "scale count J = {} outside [1, {MAX_LEVELS}]",
                self.levels
            )));
        }
        if self.surrogates < MIN_SURROGATES {
            return Err(Error::InvalidArgument(format!(
                "{} surrogates requested; at least {MIN_SURROGATES} needed",
                self.surrogates
            )));
        }
        if self.trends.is_empty() {
            return Err(Error::InvalidArgument("no trend specification selected".into()));
        }
        if self.formats.is_empty() {
            return Err(Error::InvalidArgument("no output format selected".into()));
        }
        if self.johansen_lag_order < 1 || self.granger_lag < 1 {
            return Err(Error::InvalidArgument("lag orders must be at least 1".into()));
        }
        if self.windows.iter().any(|(a, b)| a >= b) {
            return Err(Error::InvalidArgument("every window needs start < end".into()));
        }
        if self.scale_grid.s0 <= 0.0 || self.scale_grid.voices_per_octave == 0 {
            return Err(Error::InvalidArgument("scale grid needs s0 > 0 and at least one voice".into()));
        }
        Ok(())
    }

    fn fixed_adf_lags(&self, trend: TrendSpec, label: &str) -> Option<usize> {
        self.adf_lags
            .get(&format!("{}/{label}", trend.slug()))
            .or_else(|| self.adf_lags.get(label))
            .copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Ingest,
    Correlation,
    Anova,
    UnitRoot,
    Johansen,
    Granger,
    Fourier,
    Coherence,
    Report,
}

impl Stage {
    const RUN_ORDER: [Stage; 9] = [
        Stage::Ingest,
        Stage::Correlation,
        Stage::Anova,
        Stage::UnitRoot,
        Stage::Johansen,
        Stage::Granger,
        Stage::Fourier,
        Stage::Coherence,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Config => "config",
            Stage::Ingest => "ingest",
            Stage::Correlation => "correlation",
            Stage::Anova => "anova",
            Stage::UnitRoot => "unitroot",
            Stage::Johansen => "johansen",
            Stage::Granger => "granger",
            Stage::Fourier => "fourier",
            Stage::Coherence => "coherence",
            Stage::Report => "report",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug)]
pub struct PipelineError {
    pub stage: Stage,
    pub source: Error,
    /// Written even on failure, unless the failure was writing it.
    pub manifest: Option<PathBuf>,
}

impl PipelineError {
    pub fn category(&self) -> ErrorCategory {
        match self.stage {
            Stage::Config => ErrorCategory::Config,
            _ => self.source.category(),
        }
    }
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "stage `{}` failed: {}", self.stage, self.source)
    }
}

impl std::error::Error for PipelineError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.source)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageRecord {
    pub name: String,
    /// `complete`, `failed` or `skipped`.
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ArtifactRecord {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputRecord {
    pub role: String,
    pub sha256: String,
}

/// Everything a run produced. Holds no absolute paths and no timestamps, so
/// two runs with equal inputs and config serialize identically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Manifest {
    pub seed: u64,
    pub complete: bool,
    pub rows: Option<usize>,
    pub first_date: Option<String>,
    pub last_date: Option<String>,
    pub inputs: Vec<InputRecord>,
    pub stages: Vec<StageRecord>,
    pub artifacts: Vec<ArtifactRecord>,
}

#[derive(Debug)]
pub struct RunOutput {
    pub bundle: ReportBundle,
    pub panel: AlignedPanel,
    /// Coherence and multiple-coherence fields keyed by file stem.
    pub fields: Vec<(String, CoherenceField)>,
    pub manifest: Manifest,
    pub manifest_path: PathBuf,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes files under the output root and remembers their hashes.
struct Artifacts {
    root: PathBuf,
    records: Vec<ArtifactRecord>,
}

impl Artifacts {
    fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<String> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.records.retain(|r| r.path != rel);
        self.records.push(ArtifactRecord {
            path: rel.to_string(),
            bytes: bytes.len(),
            sha256: sha256_hex(bytes),
        });
        Ok(rel.to_string())
    }

    fn write_with(&mut self, rel: &str, f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<String> {
        let mut buf = Vec::new();
        f(&mut buf).map_err(|e| Error::io(self.root.join(rel), e))?;
        self.write(rel, &buf)
    }
}

/// File-name form of a series label: lower case, runs of other characters
/// become one underscore.
pub fn slug(label: &str) -> String {
    let mut out = String::new();
    for ch in label.chars() {
        if ch.is_ascii_alphanumeric() {
            out.push(ch.to_ascii_lowercase());
        } else if !out.ends_with('_') {
            out.push('_');
        }
    }
    out.trim_matches('_').to_string()
}

struct Run<'a> {
    cfg: &'a RunConfig,
    artifacts: Artifacts,
    bundle: ReportBundle,
    panel: Option<AlignedPanel>,
    fields: Vec<(String, CoherenceField)>,
}

impl Run<'_> {
    fn panel(&self) -> &AlignedPanel {
        self.panel.as_ref().expect("ingest ran first")
    }

    fn column(&self, name: &str) -> Result<&[f64]> {
        self.panel().column(name)
    }

    fn stage(&mut self, stage: Stage) -> Result<()> {
        match stage {
            Stage::Ingest => self.ingest(),
            Stage::Correlation => self.correlation(),
            Stage::Anova => self.anova(),
            Stage::UnitRoot => self.unit_root(),
            Stage::Johansen => self.johansen(),
            Stage::Granger => self.granger(),
            Stage::Fourier => self.fourier(),
            Stage::Coherence => self.coherence(),
            Stage::Report => self.tables().map(|_| ()),
            Stage::Config => Ok(()),
        }
    }

    fn ingest(&mut self) -> Result<()> {
        let panel = load_panel(&self.cfg.input)?;
        let mut csv = String::from("date");
        for name in panel.names() {
            csv.push(',');
            csv.push_str(name);
        }
        csv.push('\n');
        for (t, date) in panel.dates().iter().enumerate() {
            csv.push_str(&date.format("%Y-%m-%d").to_string());
            for col in panel.columns() {
                csv.push_str(&format!(",{}", col[t]));
            }
            csv.push('\n');
        }
        self.artifacts.write("panel.csv", csv.as_bytes())?;
        self.panel = Some(panel);
        Ok(())
    }

    fn correlation(&mut self) -> Result<()> {
        let n = self.panel().n_rows();
        let windows: Vec<(usize, usize)> = self.cfg.windows.iter().copied().filter(|(a, _)| *a < n).collect();
        if windows.len() < self.cfg.windows.len() {
            log::warn!("dropped {} correlation windows starting past row {n}", self.cfg.windows.len() - windows.len());
        }
        self.bundle.correlation = Some(windowed_correlations(self.panel(), &windows)?);
        Ok(())
    }

    fn anova(&mut self) -> Result<()> {
        let y = self.column(&self.cfg.anova_dependent)?;
        let xs = self
            .cfg
            .anova_regressors
            .iter()
            .map(|r| self.column(r))
            .collect::<Result<Vec<_>>>()?;
        let report = ols_anova(y, &xs)?;
        self.bundle.anova = Some(AnovaSection {
            dependent: self.cfg.anova_dependent.clone(),
            regressors: self.cfg.anova_regressors.clone(),
            report,
        });
        Ok(())
    }

    fn unit_root(&mut self) -> Result<()> {
        let cfg = self.cfg;
        let mut entries = Vec::new();
        for (name, col) in self.panel().names().iter().zip(self.panel().columns()) {
            for differenced in [false, true] {
                let x = if differenced { diff(col) } else { col.clone() };
                let label = if differenced { format!("Δ{name}") } else { name.clone() };
                for &trend in &cfg.trends {
                    let mut push = |report| {
                        entries.push(UnitRootEntry {
                            series: name.clone(),
                            differenced,
                            report,
                        })
                    };
                    let adf = match cfg.fixed_adf_lags(trend, &label) {
                        Some(lags) => adf_test_fixed_lags(&x, trend, lags)?,
                        None => adf_test(&x, trend, cfg.adf_max_lags)?,
                    };
                    push(adf);
                    push(pp_test(&x, trend, cfg.pp_bandwidth)?);
                    if trend != TrendSpec::None {
                        push(kpss_test(&x, trend, cfg.kpss_bandwidth)?);
                    }
                }
            }
        }
        debug_assert!(entries.iter().all(|e| e.report.test != UnitRootTest::Kpss || e.report.trend != TrendSpec::None));
        self.bundle.unit_root = Some(entries);
        Ok(())
    }

    fn johansen(&mut self) -> Result<()> {
        let report = johansen_trace(self.panel(), self.cfg.johansen_lag_order)?;
        let weights = report.eigenvectors[0].clone();
        let portfolio = portfolio_series(self.panel(), &weights)?;
        let mut csv = String::from("date,value\n");
        for (date, v) in self.panel().dates().iter().zip(&portfolio) {
            csv.push_str(&format!("{},{v}\n", date.format("%Y-%m-%d")));
        }
        self.artifacts.write("johansen/portfolio.csv", csv.as_bytes())?;
        self.bundle.johansen = Some(report);
        Ok(())
    }

    fn granger(&mut self) -> Result<()> {
        let mut decompositions = Vec::new();
        for (name, col) in self.panel().names().iter().zip(self.panel().columns()) {
            decompositions.push((name.clone(), haar_atrous_decompose_with(col, self.cfg.levels, self.cfg.boundary)?));
        }
        for (name, d) in &decompositions {
            self.artifacts.write_with(&format!("dwt/{}.csv", slug(name)), |w| d.write_csv(w))?;
        }
        let tables = scale_granger_matrix(&decompositions, &self.cfg.granger_pairs, self.cfg.granger_lag)?;
        self.bundle.granger = Some(GrangerSection {
            lag_order: self.cfg.granger_lag,
            tables,
        });
        Ok(())
    }

    fn fourier(&mut self) -> Result<()> {
        let n = self.panel().n_rows();
        let grid = index_grid(n, self.cfg.fourier_max_index);
        let mut paths = Vec::new();
        let names = self.panel().names().to_vec();
        for name in &names {
            let p = frequency_scan_with(self.column(name)?, &grid, self.cfg.demean)?;
            if p.above_nyquist() > 0 {
                log::info!("{name}: {} scan points above 0.5 cycles/week alias lower ones", p.above_nyquist());
            }
            paths.push(self.artifacts.write_with(&format!("fourier/{}.csv", slug(name)), |w| p.write_csv(w))?);
        }
        self.bundle.periodogram = Some(paths);
        Ok(())
    }

    fn write_field(&mut self, stem: &str, field: &CoherenceField) -> Result<Vec<String>> {
        Ok(vec![
            self.artifacts.write_with(&format!("coherence/{stem}.csv"), |w| field.write_csv(w))?,
            self.artifacts.write_with(&format!("coherence/{stem}.pgm"), |w| field.write_pgm(w))?,
            self.artifacts
                .write_with(&format!("coherence/{stem}_pvalues.csv"), |w| field.write_significance_csv(w).map(|_| ()))?,
        ])
    }

    fn coherence(&mut self) -> Result<()> {
        let n = self.panel().n_rows();
        let scales = self.cfg.scale_grid.scales(n);
        let engine = CoherenceEngine::new(n, &scales, &self.cfg.smoothing)?;
        let seeds = SeedTree::new(self.cfg.seed).child("coherence");
        let mut paths = Vec::new();
        for (a, b) in &self.cfg.coherence_pairs {
            let stem = format!("{}_{}", slug(a), slug(b));
            let inputs = [self.column(a)?, self.column(b)?];
            let mut field = engine.coherence(inputs[0], inputs[1])?;
            let sig = significance_with(&engine, &inputs, &field, self.cfg.surrogates, &seeds.child(&stem))?;
            field.set_significance(sig.p_values);
            paths.extend(self.write_field(&stem, &field)?);
            self.fields.push((stem, field));
        }
        for [z, x, y] in &self.cfg.mwc {
            let stem = format!("mwc_{}_{}_{}", slug(z), slug(x), slug(y));
            let inputs = [self.column(z)?, self.column(x)?, self.column(y)?];
            let mut field = engine.multiple_coherence(inputs[0], inputs[1], inputs[2])?;
            if field.undefined() > 0 {
                log::warn!("{stem}: {} cells undefined (collinear predictors)", field.undefined());
            }
            let sig = significance_with(&engine, &inputs, &field, self.cfg.surrogates, &seeds.child(&stem))?;
            field.set_significance(sig.p_values);
            paths.extend(self.write_field(&stem, &field)?);
            self.fields.push((stem, field));
        }
        self.bundle.coherence = Some(paths);
        Ok(())
    }

    /// Renders whatever sections exist, in every configured format.
    fn tables(&mut self) -> Result<Vec<String>> {
        let present = self.bundle.present();
        let mut written = Vec::new();
        for &format in &self.cfg.formats {
            for f in render(&self.bundle, format, &present)? {
                written.push(self.artifacts.write(&format!("tables/{}", f.name), f.contents.as_bytes())?);
            }
        }
        Ok(written)
    }
}

fn input_records(input: &InputConfig) -> Vec<InputRecord> {
    let p = &input.paths;
    [("nifty", &p.nifty), ("gold_usd", &p.gold_usd), ("wti_usd", &p.wti_usd), ("usdinr", &p.usdinr)]
        .into_iter()
        .filter_map(|(role, path)| {
            std::fs::read(path).ok().map(|bytes| InputRecord {
                role: role.to_string(),
                sha256: sha256_hex(&bytes),
            })
        })
        .collect()
}

fn write_manifest(root: &Path, manifest: &Manifest) -> Result<PathBuf> {
    std::fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    let path = root.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Runs every stage in order. On failure the remaining stages are skipped,
/// tables for the finished sections are still written, and the manifest
/// records which stage failed.
pub fn run_pipeline(cfg: &RunConfig) -> std::result::Result<RunOutput, PipelineError> {
    cfg.validate().map_err(|source| PipelineError {
        stage: Stage::Config,
        source,
        manifest: None,
    })?;
    let mut run = Run {
        cfg,
        artifacts: Artifacts {
            root: cfg.out_dir.clone(),
            records: Vec::new(),
        },
        bundle: ReportBundle::default(),
        panel: None,
        fields: Vec::new(),
    };
    let mut stages = Vec::new();
    let mut failure: Option<(Stage, Error)> = None;
    for stage in Stage::RUN_ORDER {
        if failure.is_some() {
            stages.push(StageRecord {
                name: stage.name().into(),
                status: "skipped".into(),
                message: None,
            });
            continue;
        }
        log::info!("stage {stage}");
        match run.stage(stage) {
            Ok(()) => stages.push(StageRecord {
                name: stage.name().into(),
                status: "complete".into(),
                message: None,
            }),
            Err(e) => {
                log::error!("stage {stage} failed: {e}");
                stages.push(StageRecord {
                    name: stage.name().into(),
                    status: "failed".into(),
                    message: Some(e.to_string()),
                });
                failure = Some((stage, e));
            }
        }
    }
    if failure.as_ref().is_some_and(|(s, _)| *s != Stage::Report) {
        // keep what finished; a failure here is reported after the stage error
        if let Err(e) = run.tables() {
            log::error!("partial tables not written: {e}");
        }
    }
    run.artifacts.records.sort_by(|a, b| a.path.cmp(&b.path));
    let panel = run.panel.as_ref();
    let manifest = Manifest {
        seed: cfg.seed,
        complete: failure.is_none(),
        rows: panel.map(AlignedPanel::n_rows),
        first_date: panel.and_then(|p| p.dates().first()).map(|d| d.format("%Y-%m-%d").to_string()),
        last_date: panel.and_then(|p| p.dates().last()).map(|d| d.format("%Y-%m-%d").to_string()),
        inputs: input_records(&cfg.input),
        stages,
        artifacts: run.artifacts.records.clone(),
    };
    let written = write_manifest(&cfg.out_dir, &manifest);
    match (failure, written) {
        (Some((stage, source)), written) => Err(PipelineError {
            stage,
            source,
            manifest: written.ok(),
        }),
        (None, Err(source)) => Err(PipelineError {
            stage: Stage::Report,
            source,
            manifest: None,
        }),
        (None, Ok(manifest_path)) => Ok(RunOutput {
            bundle: run.bundle,
            panel: run.panel.expect("ingest completed"),
            fields: run.fields,
            manifest,
            manifest_path,
        }),
    }
}
