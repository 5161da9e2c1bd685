use std::path::PathBuf;

use qrps_core::QrpsError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] QrpsError),

    /// Malformed JSON; `msg` already names the line and column.
    #[error("{}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        msg: String,
    },

    /// Well-formed input that violates a file-format rule.
    #[error("{}: {msg}", path.display())]
    Invalid { path: PathBuf, msg: String },

    /// A flag value the library never sees (empty grid, bad rate triple).
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for bad input, 3 for optimizer or simulation budgets, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(QrpsError::Config(_)) => 3,
            CliError::Core(QrpsError::Numerical(_)) | CliError::Io { .. } => 1,
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        CliError::Invalid {
            path: path.into(),
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
