//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("geometry mismatch: {0}")]
    GeometryMismatch(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("time index {t} outside environment range [0, {t_max})")]
    TimeRange { t: usize, t_max: usize },

    #[error("need {needed} consecutive kernel slices, have {available}")]
    InsufficientSlices { needed: usize, available: usize },

    #[error("resource budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("box side {m} too small: {reason}")]
    BoxTooSmall { m: usize, reason: String },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed environment file: {0}")]
    MalformedEnvFile(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
