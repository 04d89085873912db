use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid {kind}: {reason}")]
    InvalidDevice { kind: &'static str, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal residual {residual:e})")]
    NotConverged { sweeps: usize, residual: f64 },

    #[error("size cap exceeded for {what}: {count} > {cap}")]
    CapExceeded { what: String, count: usize, cap: usize },

    #[error("solver error: {0}")]
    Solver(String),

    #[error("non-monotone feasibility: feasible at {feasible} but infeasible at {infeasible}")]
    NonMonotone { feasible: f64, infeasible: f64 },

    #[error("unsupported mode: {0}")]
    Unsupported(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(kind: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidDevice {
        kind,
        reason: reason.into(),
    }
}
