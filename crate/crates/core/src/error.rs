use thiserror::Error;

/// Errors produced while assembling, building or solving convexity-constrained problems.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("non-finite sample {value} at node {node}")]
    Sampling { node: usize, value: f64 },
    #[error("directional resolution {0} exceeds pi/4, outside the validity range of the bound")]
    OutOfValidity(f64),
    #[error("invalid problem spec: {0}")]
    InvalidSpec(String),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("oracle limited to 10 variables and 12 rows, got {vars} variables and {rows} rows")]
    OracleTooLarge { vars: usize, rows: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
