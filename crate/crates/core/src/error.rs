use thiserror::Error;

/// Errors produced by graph construction and the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("graph order must be at least 1")]
    EmptyGraphOrder,
    #[error("arc ({from} -> {to}) references a node outside 0..{n}")]
    NodeOutOfRange { from: usize, to: usize, n: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("duplicate arc ({0} -> {1})")]
    DuplicateArc(usize, usize),
    #[error("arc ({from} -> {to}) has non-positive or non-finite weight {weight}")]
    NonPositiveWeight { from: usize, to: usize, weight: f64 },
    #[error("step size must be positive and finite, got {0}")]
    NonPositiveStepSize(f64),
    #[error(
        "time step and horizon must satisfy dt > 0 and t_end >= 0 (dt = {dt}, t_end = {t_end})"
    )]
    NonPositiveStepOrHorizon { dt: f64, t_end: f64 },
    #[error("expected a vector of length {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("matrix is not square or has non-finite entries")]
    InvalidMatrix,
    #[error("graph too large for forest enumeration: {0}")]
    GraphTooLargeForEnumeration(String),
    #[error("eigenvalue iteration did not converge")]
    ConvergenceFailure,
    #[error("kernel bases pair to a numerically singular matrix (smallest singular value {0:e})")]
    SingularPairing(f64),
    #[error("step size {eps} outside the stochastic range (max out-degree {max_degree})")]
    StepSizeOutsideStochasticRange { eps: f64, max_degree: f64 },
    #[error("no convergence within {0} doublings (last residual {1:e})")]
    NoConvergenceWithinBudget(usize, f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
