use thiserror::Error;

use crate::report::SolverReport;

/// Errors raised by the tensor kernels and solvers.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument does not hold (mode out of range,
    /// rank too large, negative threshold, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two operands disagree on shape.
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    /// A solver produced a non-finite value. The report covers every
    /// iteration completed before the failure.
    #[error("solver diverged at iteration {iteration}: {what} became non-finite")]
    Divergence {
        iteration: usize,
        what: String,
        report: Box<SolverReport>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn mismatch(expected: &[usize], found: &[usize]) -> Error {
    Error::DimensionMismatch {
        expected: expected.to_vec(),
        found: found.to_vec(),
    }
}
