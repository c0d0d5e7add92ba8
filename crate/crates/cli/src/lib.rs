//! Experiment harness: configuration loading, training and evaluation runs,
//! parameter sweeps and the small-instance oracle report.

pub mod artifacts;
pub mod config;
pub mod run;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{ExperimentConfig, Mode, SweepSpec};
pub use run::{run_eval, run_oracle, run_sweep, run_train, EvalReport, OracleReport, SeedRun, SweepRow};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("cannot read config {path}", path = path.display())]
    ConfigRead {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse config {path}", path = path.display())]
    ConfigParse {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Scenario(#[from] uavmec_core::ConfigError),
    #[error("cannot write {path}", path = path.display())]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}", path = path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error(transparent)]
    Checkpoint(#[from] uavmec_learn::CheckpointError),
    #[error("checkpoint does not fit this scenario: {0}")]
    CheckpointShape(String),
    #[error(transparent)]
    Learn(#[from] uavmec_learn::LearnError),
    #[error(transparent)]
    Env(#[from] uavmec_core::EnvError),
    #[error(transparent)]
    Oracle(#[from] uavmec_core::OracleError),
}

impl HarnessError {
    /// Process exit status: 2 for configuration problems, 3 for artifact problems.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::ConfigRead { .. } | Self::ConfigParse { .. } | Self::Invalid(_) | Self::Scenario(_) => 2,
            Self::Learn(uavmec_learn::LearnError::Config { .. }) => 2,
            Self::Oracle(uavmec_core::OracleError::TooLarge { .. }) => 2,
            Self::Write { .. } | Self::Csv { .. } | Self::Checkpoint(_) | Self::CheckpointShape(_) => 3,
            _ => 1,
        }
    }
}
