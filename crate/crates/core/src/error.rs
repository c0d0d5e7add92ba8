use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("invalid configuration field `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("scenario infeasible: {0}")]
    Infeasible(String),
}

/// An argument outside the domain of a physical model.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("speed must be non-negative and finite, got {0}")]
    NegativeSpeed(f64),
    #[error("link distance must be positive, got {0}")]
    NonPositiveDistance(f64),
    #[error("UAV positions coincide")]
    CoincidentPositions,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlacementError {
    #[error("placement enumeration refused: {uavs}x{types} cells exceeds the limit of {limit}")]
    TooLarge {
        uavs: usize,
        types: usize,
        limit: usize,
    },
    #[error("logit matrix has {got} entries, expected {expected}")]
    Shape { expected: usize, got: usize },
    #[error("logits must be finite")]
    NonFinite,
}

/// A decision that cannot be executed by the computing pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecisionError {
    #[error("offload ratio {0} outside [0, 1]")]
    RatioOutOfRange(f64),
    #[error("local share of the task is positive but the user CPU frequency is zero")]
    NoLocalFrequency,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("step called after the episode finished; call reset first")]
    EpisodeFinished,
    #[error("step called before reset")]
    NotReset,
    #[error("action has {got} entries, expected {expected}")]
    ActionDimension { expected: usize, got: usize },
    #[error("action entry {0} is not finite")]
    NonFiniteAction(usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("oracle supports at most 2 users, 2 UAVs and 2 types, got {users}/{uavs}/{types}")]
    TooLarge { users: usize, uavs: usize, types: usize },
    #[error("current slot has no tasks")]
    NoTasks,
    #[error(transparent)]
    Placement(#[from] PlacementError),
}
