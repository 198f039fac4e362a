use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("state norm drifted to {norm} at t = {time_over_tau} tau (tolerance {tol})")]
    NormDrift {
        norm: f64,
        time_over_tau: f64,
        tol: f64,
    },

    #[error("numerical invariant violated: {0}")]
    InvariantViolation(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
