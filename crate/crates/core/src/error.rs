use nalgebra::DMatrix;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared by the geometry, problem and optimizer layers.
#[derive(Debug, Error)]
pub enum Error {
    /// Tangent vectors from different tangent spaces were mixed, or shapes disagree.
    #[error("contract violation: {0}")]
    ContractViolation(String),
    /// A factorization failed or produced non-finite values.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// A log map or inverse retraction was requested outside its domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// An iterative solver ran out of iterations; `last` is the final iterate.
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    Convergence {
        iterations: usize,
        residual: f64,
        last: Box<DMatrix<f64>>,
    },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
