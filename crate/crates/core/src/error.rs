use thiserror::Error;

/// Errors raised by the capgraph numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A point or parameter lies outside the chart or natural domain of an object.
    #[error("domain error: {0}")]
    Domain(String),

    /// Sampled input data is unusable (non-positive growth, non-finite values, ...).
    #[error("data error: {0}")]
    Data(String),

    /// An argument violates its documented range.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A mathematical precondition of the requested check does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// No node survived the masking rules of an evaluation.
    #[error("empty evaluation: {0}")]
    EmptyEvaluation(String),

    /// The boundary value problem has no solution of the requested kind.
    #[error("infeasible problem: {0}")]
    Infeasible(String),

    /// Newton iteration failed; carries the residual history up to the failure.
    #[error("convergence failure after {iterations} iterations: {reason}")]
    Convergence {
        iterations: usize,
        reason: String,
        history: Vec<f64>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::Argument(format!("{name} must be finite, got {value}")))
    }
}
