//! Optional TOML run file. Every key is optional; command-line flags win.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use comove_core::pipeline::{InputConfig, InputPaths, RunConfig};
use comove_core::report::Format;
use comove_core::unitroot::TrendSpec;
use comove_core::wavelets::Boundary;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub nifty: Option<PathBuf>,
    pub gold_usd: Option<PathBuf>,
    pub wti_usd: Option<PathBuf>,
    pub usdinr: Option<PathBuf>,
    #[serde(default)]
    pub columns: Columns,
    pub date_column: Option<String>,
    pub date_format: Option<String>,
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub windows: Option<Vec<(usize, usize)>>,
    pub trends: Option<Vec<String>>,
    pub adf_max_lags: Option<usize>,
    #[serde(default)]
    pub adf_lags: BTreeMap<String, usize>,
    pub pp_bandwidth: Option<usize>,
    pub kpss_bandwidth: Option<usize>,
    pub johansen_lag_order: Option<usize>,
    pub levels: Option<usize>,
    pub boundary: Option<String>,
    pub granger_lag: Option<usize>,
    pub fourier_max_index: Option<usize>,
    pub demean: Option<bool>,
    pub s0: Option<f64>,
    pub voices_per_octave: Option<usize>,
    pub max_scale: Option<f64>,
    pub time_sigma_factor: Option<f64>,
    pub scale_width_decades: Option<f64>,
    pub surrogates: Option<usize>,
    pub formats: Option<Vec<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Columns {
    pub nifty: Option<String>,
    pub gold_usd: Option<String>,
    pub wti_usd: Option<String>,
    pub usdinr: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }
}

fn parse_list<T: std::str::FromStr<Err = comove_core::Error>>(items: &[String]) -> Result<Vec<T>, CliError> {
    items.iter().map(|s| s.parse().map_err(CliError::from)).collect()
}

/// Builds the run configuration from the file, then lets `apply` override
/// fields from flags. Input paths must be known by the end.
pub fn build(
    file: FileConfig,
    out_dir: PathBuf,
    flag_paths: [Option<PathBuf>; 4],
) -> Result<RunConfig, CliError> {
    let [nifty, gold, wti, fx] = flag_paths;
    let need = |flag: Option<PathBuf>, from_file: Option<PathBuf>, name: &str| {
        flag.or(from_file)
            .ok_or_else(|| CliError::config(format!("no {name} input file (flag --{name} or key `{}`)", name.replace('-', "_"))))
    };
    let paths = InputPaths {
        nifty: need(nifty, file.nifty, "nifty")?,
        gold_usd: need(gold, file.gold_usd, "gold-usd")?,
        wti_usd: need(wti, file.wti_usd, "wti-usd")?,
        usdinr: need(fx, file.usdinr, "usdinr")?,
    };
    let mut input = InputConfig::new(paths);
    let cols = file.columns;
    for (slot, v) in [
        (&mut input.columns.nifty, cols.nifty),
        (&mut input.columns.gold_usd, cols.gold_usd),
        (&mut input.columns.wti_usd, cols.wti_usd),
        (&mut input.columns.usdinr, cols.usdinr),
    ] {
        if let Some(v) = v {
            *slot = v;
        }
    }
    if let Some(v) = file.date_column {
        input.csv.date_column = v;
    }
    if let Some(v) = file.date_format {
        input.csv.date_format = v;
    }
    let mut cfg = RunConfig::new(input, out_dir);
    macro_rules! take {
        ($($field:ident),*) => {$(
            if let Some(v) = file.$field {
                cfg.$field = v;
            }
        )*};
    }
    take!(seed, windows, johansen_lag_order, levels, granger_lag, fourier_max_index, demean, surrogates);
    cfg.adf_max_lags = file.adf_max_lags;
    cfg.pp_bandwidth = file.pp_bandwidth;
    cfg.kpss_bandwidth = file.kpss_bandwidth;
    cfg.adf_lags = file.adf_lags;
    if let Some(v) = file.trends {
        cfg.trends = parse_list::<TrendSpec>(&v)?;
    }
    if let Some(v) = file.formats {
        cfg.formats = parse_list::<Format>(&v)?;
    }
    if let Some(v) = file.boundary {
        cfg.boundary = v.parse::<Boundary>()?;
    }
    if let Some(v) = file.s0 {
        cfg.scale_grid.s0 = v;
    }
    if let Some(v) = file.voices_per_octave {
        cfg.scale_grid.voices_per_octave = v;
    }
    if let Some(v) = file.max_scale {
        cfg.scale_grid.max_scale = v;
    }
    if let Some(v) = file.time_sigma_factor {
        cfg.smoothing.time_sigma_factor = v;
    }
    if let Some(v) = file.scale_width_decades {
        cfg.smoothing.scale_width_decades = v;
    }
    Ok(cfg)
}
