use thiserror::Error;

/// Errors produced by the operators, solvers and study drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("divergent integral: {0}")]
    DivergentIntegral(String),

    #[error("field carries no usable far-field metadata: {0}")]
    MissingFarField(String),

    #[error("spectral backend needs matching far-field limits (left {left}, right {right})")]
    NonMatchingLimits { left: f64, right: f64 },

    #[error("input does not decay at infinity (left {left}, right {right})")]
    NonDecaying { left: f64, right: f64 },

    #[error("empty particle system: {0}")]
    EmptyParticleSystem(String),

    #[error("field is not non-decreasing: drop of {drop:e} at node {index}")]
    NonMonotone { index: usize, drop: f64 },

    #[error("time step {dt:e} exceeds the stability bound {bound:e}")]
    CflViolation { dt: f64, bound: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("particle ordering lost at step {step} (pair {index}, gap {gap:e})")]
    OrderingViolation { step: usize, index: usize, gap: f64 },

    #[error("coincident particle positions at index {0}")]
    CoincidentPositions(usize),

    #[error("field is not a transition layer: {0}")]
    NotALayer(String),

    #[error("potential rejected: {0}")]
    PotentialRejected(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
