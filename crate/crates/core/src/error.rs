use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied parameter violates a documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Inconsistent structure: wrong arity, mismatched lengths, bad chain maps.
    #[error("structural error: {0}")]
    Structure(String),

    /// The requested exact computation exceeds the enumeration ceiling.
    #[error("instance too large for exact enumeration: {0}")]
    TooLarge(String),

    /// Not enough data to evaluate a statistic or fit.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// The nishimori temperature is zero (p = 0) or undefined (p = 1).
    #[error("inverse temperature is infinite at p = {0}")]
    InfiniteBeta(f64),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("checkpoint rejected: {0}")]
    Checkpoint(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
