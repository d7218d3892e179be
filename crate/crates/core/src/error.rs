use thiserror::Error;

#[derive(Debug, Error)]
pub enum BbkbError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate dictionary: every eigenvalue of the inducing kernel matrix is below the pseudo-inverse threshold")]
    DegenerateDictionary,

    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("degenerate dataset: {0}")]
    DegenerateDataset(String),

    #[error("oracle failure: {0}")]
    Oracle(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, BbkbError>;

pub(crate) fn invalid(msg: impl Into<String>) -> BbkbError {
    BbkbError::InvalidInput(msg.into())
}
