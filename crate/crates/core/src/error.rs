use thiserror::Error;

/// Errors produced by graph construction, learning and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    /// Input violated a documented precondition.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// An iterate became NaN or infinite.
    #[error("non-finite iterate at iteration {iteration} in {solver}")]
    NonFinite { solver: &'static str, iteration: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
