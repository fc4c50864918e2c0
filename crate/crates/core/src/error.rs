use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value encountered in {context}")]
    NonFinite { context: &'static str },

    #[error("rank-deficient column {column} in QR update")]
    RankDeficient { column: usize },

    #[error("singular triangular block in {context}")]
    SingularBlock { context: &'static str },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("restart cannot make progress: residual exceeds the target on every candidate sub-interval")]
    RestartStalled,

    #[error("parse error in {path} at line {line}: {reason}")]
    Parse {
        path: String,
        line: usize,
        reason: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
