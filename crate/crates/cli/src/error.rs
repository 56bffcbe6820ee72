use std::path::PathBuf;

use levytail::LevyError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },

    #[error(transparent)]
    Numeric(LevyError),

    #[error("{0}")]
    Analysis(String),

    #[error("replay differs from the recorded run: {0}")]
    ReplayMismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io { .. } | CliError::Input { .. } => 2,
            CliError::Numeric(_) | CliError::Analysis(_) | CliError::ReplayMismatch(_) => 3,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn input(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        CliError::Input {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl From<LevyError> for CliError {
    fn from(e: LevyError) -> Self {
        match e {
            LevyError::InvalidParameter { .. } => CliError::Usage(e.to_string()),
            other => CliError::Numeric(other),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
