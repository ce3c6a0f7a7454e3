use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("unknown register block `{0}`")]
    UnknownBlock(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("subnormalized input rejected (trace {0})")]
    Subnormalized(f64),

    #[error("state is not pure (purity {0})")]
    NotPure(f64),

    #[error("capacity exceeded: dimension {dim} above cap {cap}")]
    CapacityExceeded { dim: usize, cap: usize },

    #[error("solver failed to converge: {reason} (residual {residual:.3e})")]
    SolverFailure { reason: String, residual: f64 },

    #[error("infeasible budget: {0}")]
    InfeasibleBudget(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
