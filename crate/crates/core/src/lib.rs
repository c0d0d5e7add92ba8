//! Discrete-time simulator of a multi-UAV cooperative edge-computing network.
//!
//! Users on the ground generate one typed task per slot. Each task is split
//! between local execution and offloading to a serving UAV, which may relay
//! it to another UAV hosting the matching service. [`env::Environment`]
//! wraps the physics as an episodic decision process.

pub mod channel;
pub mod config;
pub mod constraints;
pub mod energy;
pub mod env;
pub mod error;
pub mod oracle;
pub mod placement;
pub mod world;

pub use config::{ChannelParams, InterferenceMode, PropulsionParams, ResourceParams, ScenarioConfig};
pub use energy::{EnergyBreakdown, SlotDecision, StageCost, UserCost};
pub use error::{ConfigError, DecisionError, DomainError, EnvError, OracleError, PlacementError};
pub use placement::{PlacementMatrix, ServiceCatalog};
pub use world::{TaskSpec, UavState, UserState, Vec3, WorldState};
pub use env::{DecodingMode, EnvOptions, Environment, PenaltyTerms, Step, StepInfo};
