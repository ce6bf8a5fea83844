use thiserror::Error;

/// Errors raised by the linear-algebra layer and the jamming solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum JamError {
    /// Malformed input: wrong dimensions, non-finite entries, negative powers.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The input is well formed but outside the operation's domain
    /// (e.g. a log-determinant of a matrix that is not positive definite).
    #[error("domain error: {0}")]
    Domain(String),

    /// The jamming channel has no nonzero singular value, so no jamming
    /// covariance can influence the legitimate rate.
    #[error("jamming channel is numerically zero")]
    DegenerateChannel,

    /// A guarantee the algorithm relies on did not hold at runtime.
    #[error("numerical contract violated: {0}")]
    ContractViolation(String),
}

pub type Result<T, E = JamError> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> JamError {
    JamError::InvalidInput(msg.into())
}
