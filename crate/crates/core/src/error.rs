use std::path::PathBuf;

use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("singular design: {0}")]
    SingularDesign(String),

    #[error("numerical rank deficiency: {0}")]
    NumericalRank(String),

    #[error("sample too small: {0}")]
    SampleSize(String),

    #[error("unsupported specification: {0}")]
    Unsupported(String),

    #[error("report incomplete, missing sections: {}", .0.join(", "))]
    Incomplete(Vec<String>),
}

/// Coarse grouping used to pick a process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Data,
    Numerical,
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Io { .. }
            | Error::Parse { .. }
            | Error::Validation(_)
            | Error::Alignment(_)
            | Error::UnknownColumn(_)
            | Error::SampleSize(_) => ErrorCategory::Data,
            Error::InvalidArgument(_) | Error::Unsupported(_) | Error::Incomplete(_) => {
                ErrorCategory::Config
            }
            Error::UndefinedCorrelation(_) | Error::SingularDesign(_) | Error::NumericalRank(_) => {
                ErrorCategory::Numerical
            }
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
