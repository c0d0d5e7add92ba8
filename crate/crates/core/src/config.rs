//! Scenario, propulsion, resource and channel constants.
//!
//! Defaults reproduce the full-scale experimental setting: 20 users, 5 UAVs,
//! 5 task/service types over a 500 m square with 100–200 m flight altitude.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Bits in one gigabyte of memory or storage.
pub const BITS_PER_GB: f64 = 8.0e9;

/// Converts a power level in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Rotary-wing propulsion constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropulsionParams {
    /// Blade profile power P0 [W].
    pub blade_profile_power: f64,
    /// Induced (hover) power P1 [W].
    pub induced_power: f64,
    /// Rotor blade tip speed U_tip [m/s].
    pub tip_speed: f64,
    /// Mean rotor induced velocity v0 [m/s].
    pub mean_rotor_velocity: f64,
    /// Air density [kg/m³].
    pub air_density: f64,
    /// Fuselage drag ratio b1.
    pub fuselage_drag_ratio: f64,
    /// Rotor disc area A [m²].
    pub rotor_area: f64,
    /// Rotor solidity g.
    pub rotor_solidity: f64,
}

impl Default for PropulsionParams {
    fn default() -> Self {
        Self {
            blade_profile_power: 59.03,
            induced_power: 79.07,
            tip_speed: 120.0,
            mean_rotor_velocity: 3.6,
            air_density: 1.225,
            fuselage_drag_ratio: 0.6,
            rotor_area: 0.503,
            rotor_solidity: 0.05,
        }
    }
}

/// How co-channel interference enters the SINR denominators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InterferenceMode {
    /// Every link gets its own sub-band; interference is zero.
    #[default]
    Orthogonal,
    /// All same-band transmitters interfere at every receiver.
    Aggregate,
}

/// User–UAV and UAV–UAV link constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelParams {
    /// User–UAV bandwidth B0 [Hz].
    pub user_bandwidth: f64,
    /// UAV–UAV bandwidth B1 [Hz].
    pub uav_bandwidth: f64,
    /// Reference path-loss coefficient ϖ of the user–UAV link.
    pub reference_gain: f64,
    /// Path-loss exponent γ.
    pub path_loss_exponent: f64,
    /// Rician K-factor φ (linear).
    pub rician_factor: f64,
    /// UAV–UAV power gain β0 at 1 m.
    pub uav_reference_gain: f64,
    /// User–UAV receiver noise power σ0² [W].
    pub user_noise_power: f64,
    /// UAV–UAV receiver noise power σ1² [W].
    pub uav_noise_power: f64,
    pub interference_mode: InterferenceMode,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            user_bandwidth: 10.0e6,
            uav_bandwidth: 10.0e6,
            reference_gain: 1.0e-3,
            path_loss_exponent: 2.2,
            rician_factor: 10.0,
            uav_reference_gain: 1.0e-5,
            user_noise_power: dbm_to_watts(-85.0),
            uav_noise_power: dbm_to_watts(-85.0),
            interference_mode: InterferenceMode::Orthogonal,
        }
    }
}

/// Computing, memory, storage and radio resources of users and UAVs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResourceParams {
    /// Range UAV memory budgets are drawn from [GB].
    pub memory_gb: [f64; 2],
    /// Range UAV storage budgets are drawn from [GB].
    pub storage_gb: [f64; 2],
    /// UAV CPU capacity F_m [cycles/s].
    pub uav_cpu_hz: f64,
    /// User CPU capacity F_k [cycles/s].
    pub user_cpu_hz: f64,
    /// User transmit power p_k [W].
    pub user_tx_power: f64,
    /// UAV relay transmit power [W].
    pub uav_tx_power: f64,
    /// Effective switched capacitance κ.
    pub effective_capacitance: f64,
    /// Probability that a user hosts the service for a given type locally.
    pub local_service_prob: f64,
    /// Task size range [bits].
    pub task_size_bits: [f64; 2],
    /// Task complexity range [cycles/bit].
    pub task_complexity: [f64; 2],
}

impl Default for ResourceParams {
    fn default() -> Self {
        Self {
            memory_gb: [10.0, 24.0],
            storage_gb: [400.0, 860.0],
            uav_cpu_hz: 10.0e9,
            user_cpu_hz: 1.0e9,
            user_tx_power: 0.5,
            uav_tx_power: 1.0,
            effective_capacitance: 1.0e-28,
            local_service_prob: 0.5,
            task_size_bits: [3.5e6, 4.5e6],
            task_complexity: [500.0, 1500.0],
        }
    }
}

/// Everything needed to build a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Number of ground users K.
    pub users: usize,
    /// Number of UAVs M.
    pub uavs: usize,
    /// Number of task/service types Z.
    pub service_types: usize,
    /// Slots per episode T.
    pub horizon: usize,
    /// Slot duration δ [s].
    pub slot_duration: f64,
    /// Maximum UAV speed [m/s].
    pub max_speed: f64,
    /// Minimum safe UAV separation [m].
    pub safety_distance: f64,
    pub min_altitude: f64,
    pub max_altitude: f64,
    /// Lower horizontal bound of the service area [m].
    pub area_min: f64,
    /// Upper horizontal bound of the service area [m].
    pub area_max: f64,
    /// Out-of-bounds penalty scale W [m].
    pub out_of_bounds_scale: f64,
    /// Weight ω of UAV-side energy in the system objective.
    pub uav_energy_weight: f64,
    /// Seed for scenario layout (users, footprints, budgets, start positions).
    pub seed: u64,
    pub propulsion: PropulsionParams,
    pub resources: ResourceParams,
    pub channel: ChannelParams,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            users: 20,
            uavs: 5,
            service_types: 5,
            horizon: 200,
            slot_duration: 1.0,
            max_speed: 35.0,
            safety_distance: 3.0,
            min_altitude: 100.0,
            max_altitude: 200.0,
            area_min: 0.0,
            area_max: 500.0,
            out_of_bounds_scale: 100.0,
            uav_energy_weight: 0.5,
            seed: 0,
            propulsion: PropulsionParams::default(),
            resources: ResourceParams::default(),
            channel: ChannelParams::default(),
        }
    }
}

impl ScenarioConfig {
    /// Scaled-down setting used for quick experiments: 5 users, 2 UAVs, 2 types.
    pub fn desk() -> Self {
        Self {
            users: 5,
            uavs: 2,
            service_types: 2,
            ..Self::default()
        }
    }

    /// Checks every invariant, naming the first offending field.
    pub fn validate(&self) -> Result<(), ConfigError> {
        fn check(ok: bool, field: &'static str, reason: &str) -> Result<(), ConfigError> {
            if ok {
                Ok(())
            } else {
                Err(ConfigError::Invalid {
                    field,
                    reason: reason.to_string(),
                })
            }
        }
        fn range(r: [f64; 2], field: &'static str) -> Result<(), ConfigError> {
            check(
                r[0].is_finite() && r[1].is_finite() && r[0] > 0.0 && r[0] <= r[1],
                field,
                "expected 0 < min <= max",
            )
        }
        fn positive(x: f64, field: &'static str) -> Result<(), ConfigError> {
            check(x.is_finite() && x > 0.0, field, "must be positive and finite")
        }

        check(self.users >= 1, "users", "need at least one user")?;
        check(self.uavs >= 1, "uavs", "need at least one UAV")?;
        check(self.service_types >= 1, "service_types", "need at least one type")?;
        check(self.horizon >= 1, "horizon", "need at least one slot")?;
        positive(self.slot_duration, "slot_duration")?;
        positive(self.max_speed, "max_speed")?;
        check(
            self.safety_distance.is_finite() && self.safety_distance >= 0.0,
            "safety_distance",
            "must be non-negative",
        )?;
        check(self.min_altitude > 0.0, "min_altitude", "must be positive")?;
        check(
            self.max_altitude.is_finite() && self.min_altitude < self.max_altitude,
            "max_altitude",
            "must exceed min_altitude",
        )?;
        check(self.area_min >= 0.0, "area_min", "must be non-negative")?;
        check(
            self.area_max.is_finite() && self.area_min < self.area_max,
            "area_max",
            "must exceed area_min",
        )?;
        positive(self.out_of_bounds_scale, "out_of_bounds_scale")?;
        check(
            self.uav_energy_weight.is_finite() && self.uav_energy_weight >= 0.0,
            "uav_energy_weight",
            "must be non-negative",
        )?;

        let p = &self.propulsion;
        positive(p.blade_profile_power, "propulsion.blade_profile_power")?;
        positive(p.induced_power, "propulsion.induced_power")?;
        positive(p.tip_speed, "propulsion.tip_speed")?;
        positive(p.mean_rotor_velocity, "propulsion.mean_rotor_velocity")?;
        positive(p.air_density, "propulsion.air_density")?;
        positive(p.fuselage_drag_ratio, "propulsion.fuselage_drag_ratio")?;
        positive(p.rotor_area, "propulsion.rotor_area")?;
        positive(p.rotor_solidity, "propulsion.rotor_solidity")?;

        let r = &self.resources;
        range(r.memory_gb, "resources.memory_gb")?;
        range(r.storage_gb, "resources.storage_gb")?;
        positive(r.uav_cpu_hz, "resources.uav_cpu_hz")?;
        positive(r.user_cpu_hz, "resources.user_cpu_hz")?;
        positive(r.user_tx_power, "resources.user_tx_power")?;
        positive(r.uav_tx_power, "resources.uav_tx_power")?;
        positive(r.effective_capacitance, "resources.effective_capacitance")?;
        check(
            (0.0..=1.0).contains(&r.local_service_prob),
            "resources.local_service_prob",
            "must lie in [0, 1]",
        )?;
        range(r.task_size_bits, "resources.task_size_bits")?;
        range(r.task_complexity, "resources.task_complexity")?;

        let c = &self.channel;
        positive(c.user_bandwidth, "channel.user_bandwidth")?;
        positive(c.uav_bandwidth, "channel.uav_bandwidth")?;
        positive(c.reference_gain, "channel.reference_gain")?;
        check(
            c.path_loss_exponent.is_finite() && c.path_loss_exponent >= 2.0,
            "channel.path_loss_exponent",
            "must be at least 2",
        )?;
        check(
            c.rician_factor.is_finite() && c.rician_factor >= 0.0,
            "channel.rician_factor",
            "must be non-negative",
        )?;
        positive(c.uav_reference_gain, "channel.uav_reference_gain")?;
        positive(c.user_noise_power, "channel.user_noise_power")?;
        positive(c.uav_noise_power, "channel.uav_noise_power")?;
        Ok(())
    }
}
