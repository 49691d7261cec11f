use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Bad argument supplied by the caller.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("qubit index {index} out of range 1..={n_qubits}")]
    QubitOutOfRange { index: usize, n_qubits: usize },
    #[error("terms {first} and {second} of group {group} do not commute")]
    NonCommutingGroup { group: usize, first: usize, second: usize },
    #[error("alternative form needs 2m >= n (m = {m}, n = {n})")]
    AlternativeOrder { m: usize, n: usize },
    /// A numerical invariant failed; the message names it.
    #[error("numerical breakdown: {0}")]
    Breakdown(String),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn breakdown(msg: impl Into<String>) -> Self {
        Error::Breakdown(msg.into())
    }

    /// True for failures of numerical invariants, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Breakdown(_) | Error::NoConvergence { .. })
    }
}
