use thiserror::Error;

/// Errors raised by the numerical operations of this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected} real coordinates, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("did not converge: {0}")]
    NonConvergence(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
