use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("enumeration of {size} items exceeds the configured limit of {limit}")]
    Capacity { size: f64, limit: u64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("support mask selects no types")]
    EmptySupport,

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
