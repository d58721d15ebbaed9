use std::path::PathBuf;

use bayesbag_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("{path}:{line}: {msg}")]
    Ingest { path: PathBuf, line: u64, msg: String },

    #[error("data: {0}")]
    Data(String),

    #[error("resource guard: {0}")]
    Guard(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Core(#[from] CoreError),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 1 usage, 2 data, 3 resource guard.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Guard(_) => 3,
            CliError::Core(e) => match e.root() {
                CoreError::InvalidArgument(_) => 1,
                CoreError::ResourceLimit { .. } => 3,
                _ => 2,
            },
            _ => 2,
        }
    }

    /// Attaches sizing advice to enumeration guard failures.
    pub fn with_guard_advice(self, advice: &str) -> Self {
        match self {
            CliError::Core(e) if matches!(e.root(), CoreError::ResourceLimit { .. }) => {
                CliError::Guard(format!("{e}; {advice}"))
            }
            other => other,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
