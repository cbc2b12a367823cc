use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// More ground-truth points than proposals.
    #[error("count mismatch: {gt} ground-truth points but only {pred} proposals")]
    CountMismatch { gt: usize, pred: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("instance too large for exhaustive enumeration ({rows}x{cols}, limit {max_rows}x{max_cols})")]
    TooLarge {
        rows: usize,
        cols: usize,
        max_rows: usize,
        max_cols: usize,
    },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("alpha must lie in [0, 1], got {0}")]
    InvalidAlpha(f64),

    #[error("cannot evaluate an empty dataset")]
    EmptyDataset,

    #[error("loss became non-finite at step {step}")]
    DivergenceDetected { step: usize },

    #[error("line {line}: parse error: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: schema error: {message}")]
    Schema { line: usize, message: String },

    #[error("invalid value for `{key}`: {message}")]
    Validation { key: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
