use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("non-finite value at node {index}")]
    NonFinite { index: usize },
    #[error("unsupported exponent p = {0}")]
    UnsupportedExponent(f64),
    #[error("unknown initial-data family `{0}`")]
    UnknownFamily(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("root bracketing failed for modulus {modulus}: {reason}")]
    NoBracket { modulus: String, reason: String },
    #[error("input is not spectrally resolved: tail ratio {ratio:e} exceeds {limit:e}")]
    Unresolved { ratio: f64, limit: f64 },
    #[error("csv: {0}")]
    Csv(String),
    #[error("mean drift {drift:e} exceeds tolerance {tolerance:e}")]
    MeanDrift { drift: f64, tolerance: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
