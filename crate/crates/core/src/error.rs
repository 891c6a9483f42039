use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid tree shape: {0}")]
    InvalidShape(String),

    #[error("requested {requested} random bits per node, limit is {limit}")]
    WidthTooLarge { requested: u32, limit: u32 },

    #[error("enumeration needs {needed} leaf configurations, cap is {cap}")]
    EnumerationCap { needed: String, cap: u64 },

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("theta = {0} is not dyadic; use biased_bit_approx for arbitrary rationals")]
    NonDyadic(String),

    #[error("operation requires binary labels, got m = {0}")]
    NotBinary(usize),

    #[error("leaf {leaf} has an all-zero likelihood vector")]
    ZeroLikelihood { leaf: usize },

    #[error("evidence has zero probability under the channel")]
    ImpossibleEvidence,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
