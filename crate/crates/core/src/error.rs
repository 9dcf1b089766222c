use thiserror::Error;

/// Errors raised across the simulator, planner and learner.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("query ({x:.4}, {y:.4}) is outside the elevation grid")]
    OutOfBounds { x: f64, y: f64 },

    #[error("invalid elevation grid: {0}")]
    InvalidGrid(String),

    #[error("invalid scenario spec: {0}")]
    InvalidSpec(String),

    #[error("invalid start zone: {0}")]
    InvalidZone(String),

    #[error("no valid goal found after {attempts} attempts")]
    NoValidGoal { attempts: usize },

    #[error("elevation history is empty")]
    EmptyHistory,

    #[error("episode normalizer is degenerate (denominator {0})")]
    DegenerateNormalizer(f64),

    #[error("candidate ({v:.4}, {omega:.4}) is not admissible")]
    InadmissibleCandidate { v: f64, omega: f64 },

    #[error("no admissible velocity in the dynamic window")]
    NoAdmissibleVelocity,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("replay buffer holds {available} transitions, {requested} requested")]
    InsufficientSamples { requested: usize, available: usize },

    #[error("aggregate called on an empty set of episode logs")]
    EmptyInput,

    #[error("commanded velocity ({v:.6}, {omega:.6}) violates the dynamic window")]
    InfeasibleCommand { v: f64, omega: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
