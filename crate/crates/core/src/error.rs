use thiserror::Error;

/// Errors raised across the library.
///
/// Validation failures name the violated invariant so callers (and the CLI)
/// can surface them verbatim.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QrpsError {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("singular configuration: {0}")]
    Singular(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl QrpsError {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        QrpsError::Validation(msg.into())
    }

    pub(crate) fn dimension(msg: impl Into<String>) -> Self {
        QrpsError::Dimension(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, QrpsError>;
