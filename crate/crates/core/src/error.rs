use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GleError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid kernel parameters: {0}")]
    InvalidKernel(String),
    #[error("kernel inadmissible: {0}")]
    Inadmissible(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("tail unclassified: log-log fit R^2 = {r2:.6} below threshold")]
    Unclassified { r2: f64 },
    #[error("quadrature did not converge: value {value:e}, error estimate {err_est:e}, certified bound {bound:e}")]
    NotConverged { value: f64, err_est: f64, bound: f64 },
    #[error("synthesis budget violated: {0}")]
    Budget(String),
    #[error("insufficient points: need {needed}, have {have}")]
    InsufficientPoints { needed: usize, have: usize },
    #[error("prediction unavailable: {0}")]
    PredictionUnavailable(String),
}

pub type Result<T> = std::result::Result<T, GleError>;
