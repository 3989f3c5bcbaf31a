mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use comove_core::pipeline::PipelineError;
use comove_core::ErrorCategory;

pub const DEFAULT_OUT_DIR: &str = "comove-out";

/// Co-movement analysis of weekly Nifty, gold and crude prices in rupees.
#[derive(Debug, Parser)]
#[command(name = "comove", version, propagate_version = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
#[command(next_help_heading = "Inputs and output")]
pub struct Global {
    /// TOML run file; flags override its keys.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Nifty index CSV (already in rupees).
    #[arg(long, global = true, value_name = "CSV")]
    pub nifty: Option<PathBuf>,
    /// Gold price CSV in US dollars.
    #[arg(long, global = true, value_name = "CSV")]
    pub gold_usd: Option<PathBuf>,
    /// WTI crude price CSV in US dollars.
    #[arg(long, global = true, value_name = "CSV")]
    pub wti_usd: Option<PathBuf>,
    /// Rupees per US dollar CSV.
    #[arg(long, global = true, value_name = "CSV")]
    pub usdinr: Option<PathBuf>,
    /// Name of the date column in every input file.
    #[arg(long, global = true)]
    pub date_column: Option<String>,
    /// chrono format of the date column, e.g. %d/%m/%Y.
    #[arg(long, global = true)]
    pub date_format: Option<String>,
    /// Output directory [default: comove-out].
    #[arg(long, global = true, env = "COMOVE_OUT_DIR", value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Root seed for every random stream.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Table format; repeat for several.
    #[arg(long, global = true, value_parser = ["markdown", "md", "csv"])]
    pub format: Vec<String>,
    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Every stage in order, with a hashed manifest of all outputs.
    Run(commands::RunArgs),
    /// Pairwise correlations over row windows.
    Corr(commands::CorrArgs),
    /// Least-squares regression with ANOVA summary and Durbin-Watson.
    Anova(commands::AnovaArgs),
    /// ADF, Phillips-Perron and KPSS tests.
    Unitroot(commands::UnitRootArgs),
    /// Johansen trace test and the implied portfolio series.
    Johansen(commands::JohansenArgs),
    /// Haar à trous decomposition into dyadic scales.
    Dwt(commands::DwtArgs),
    /// Granger F-tests on each wavelet scale.
    Granger(commands::GrangerArgs),
    /// Periodogram over Fourier bin indices.
    Fourier(commands::FourierArgs),
    /// Wavelet coherence of series pairs with Monte-Carlo p-values.
    Coherence(commands::CoherenceArgs),
    /// Multiple wavelet coherence of one series on two others.
    Mwc(commands::MwcArgs),
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }
}

fn category_code(c: ErrorCategory) -> u8 {
    match c {
        ErrorCategory::Config => 2,
        ErrorCategory::Data => 3,
        ErrorCategory::Numerical => 4,
    }
}

impl From<comove_core::Error> for CliError {
    fn from(e: comove_core::Error) -> Self {
        CliError {
            code: category_code(e.category()),
            message: e.to_string(),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        let mut message = e.to_string();
        if let Some(m) = &e.manifest {
            message.push_str(&format!(" (partial outputs listed in {})", m.display()));
        }
        CliError {
            code: category_code(e.category()),
            message,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.global.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    match commands::dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("comove: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
