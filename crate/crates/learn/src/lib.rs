//! Soft actor-critic built on a small hand-differentiated MLP stack.

pub mod adam;
pub mod checkpoint;
pub mod nn;
pub mod policy;
pub mod replay;
pub mod sac;
pub mod train;

use thiserror::Error;

pub use checkpoint::CheckpointError;
pub use sac::{SacAgent, SacConfig};
pub use train::{train, EpisodeLog, EvalSummary, TrainOutcome};

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("invalid trainer setting `{field}`: {reason}")]
    Config { field: &'static str, reason: String },
    #[error("empty batch")]
    EmptyBatch,
    #[error("buffer holds {have} transitions, batch needs {need}")]
    NotEnoughData { have: usize, need: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("environment and agent disagree: {0}")]
    Shape(String),
    #[error(transparent)]
    Env(#[from] uavmec_core::EnvError),
}
