use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("non-finite value at node {index}: {context}")]
    NonFinite { index: usize, context: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("quadrature not converged: estimated error {estimate:.3e} > tolerance {tol:.3e}")]
    QuadratureNotConverged { estimate: f64, tol: f64 },
    #[error("Picard iteration diverged: iterate sup-norm {norm:.3e}")]
    PicardDiverged { norm: f64 },
    #[error("NaN state encountered at t = {t}")]
    NanState { t: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
