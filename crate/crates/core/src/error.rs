//! Error type shared by every module in the crate.

use std::path::PathBuf;

use thiserror::Error;

use crate::month::MonthStamp;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: missing column \"{column}\"")]
    Schema { column: String },

    #[error("gap in series \"{series}\": first missing month {missing}")]
    Gap { series: String, missing: MonthStamp },

    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: u64,
        message: String,
    },

    #[error("io error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("insufficient data for {what}: need at least {needed}, got {got}")]
    InsufficientData {
        what: String,
        needed: usize,
        got: usize,
    },

    #[error("range error: {0}")]
    Range(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("missing dependency: forecast column \"{column}\" is required")]
    Dependency { column: String },

    #[error("lookup error: {0}")]
    Lookup(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("all {} candidates failed: {}", .0.len(), .0.join("; "))]
    Aggregate(Vec<String>),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Schema { .. }
            | Error::Config(_)
            | Error::Range(_)
            | Error::Dependency { .. }
            | Error::Lookup(_) => 2,
            Error::Gap { .. }
            | Error::Parse { .. }
            | Error::Io { .. }
            | Error::InsufficientData { .. }
            | Error::Alignment(_) => 3,
            Error::Domain(_) | Error::Singular(_) | Error::Undefined(_) | Error::Aggregate(_) => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
