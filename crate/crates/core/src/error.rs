use thiserror::Error;

use crate::pipeline::SearchTrace;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no points provided")]
    EmptyInput,

    #[error("dimension mismatch: expected dim={expected}, got dim={got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid k={k}: must satisfy 1 <= k <= {available}")]
    InvalidK { k: usize, available: usize },

    #[error("k={k} exceeds the 64-center limit of joiner bitmasks")]
    TooManyCenters { k: usize },

    #[error("invalid group model: {0}")]
    InvalidGroupModel(String),

    #[error("invalid fairness parameters: {0}")]
    InvalidParams(String),

    #[error("delta must lie in [0, 1), got {0}")]
    InvalidDelta(f64),

    #[error("point {point} is farther than lambda={lambda} from every center")]
    Unreachable { point: usize, lambda: f64 },

    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),

    #[error("simplex exceeded its iteration limit ({limit})")]
    IterationLimit { limit: usize },

    #[error("infeasible fairness parameters: no fair fractional assignment exists even at the maximum radius")]
    InfeasibleFairness,

    #[error("time limit exceeded after {} search iterations", .trace.steps.len())]
    TimeLimit { trace: Box<SearchTrace> },

    #[error("instance too large for exhaustive search: {0}")]
    InstanceTooLarge(String),

    #[error("inconsistent assignment probabilities: {0}")]
    InconsistentProbabilities(String),

    #[error("failed to load dataset: {0}")]
    Load(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
