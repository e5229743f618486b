use thiserror::Error;

/// Errors produced by the geometric and numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("diagnostic error: {0}")]
    Diagnostic(String),

    #[error("lift is not exact: plaquette closure defect {defect:.3e} exceeds threshold {threshold:.3e}")]
    NonExactLagrangian { defect: f64, threshold: f64 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
