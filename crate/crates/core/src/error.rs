use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} qubits, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("block {block}: total weight W = {weight:.6} is not below the validity limit {limit}")]
    Validity { block: usize, weight: f64, limit: f64 },

    #[error("compilation check failed: {0}")]
    Compilation(String),

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    #[error("no accepted shots")]
    NoData,

    #[error("config error:\n{0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
