use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    /// The Gram matrix of the constraint map is numerically singular, so the
    /// map is not surjective.
    #[error("constraint map is not surjective: pivot {pivot:e} at row {row} is below {threshold:e}")]
    SurjectivityViolation { row: usize, pivot: f64, threshold: f64 },

    #[error("no convergence after {iterations} iterations (best estimate {estimate})")]
    NoConvergence { iterations: usize, estimate: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("w-subproblem unsupported: {0}")]
    WSubproblemUnsupported(String),

    #[error("function has no value oracle")]
    ValueOracleMissing,

    #[error("invalid iterate state: {0}")]
    State(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}
