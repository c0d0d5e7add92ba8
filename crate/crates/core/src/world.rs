//! Scenario geometry, UAV kinematics and propulsion energy.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{PropulsionParams, ScenarioConfig};
use crate::error::{ConfigError, DomainError};
use crate::placement::{coverage_anchor, PlacementMatrix, ServiceCatalog};

pub type Vec3 = Vector3<f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UavState {
    pub position: Vec3,
    pub velocity: Vec3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserState {
    /// Ground position; z is always 0.
    pub position: Vec3,
    /// `local_services[z]` is true when the user can run type-z tasks itself.
    pub local_services: Vec<bool>,
}

/// One task generated by a user in the current slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    /// Size [bits].
    pub size: f64,
    /// Type index z.
    pub kind: usize,
    /// Processing requirement c_z [cycles/bit].
    pub complexity: f64,
}

impl TaskSpec {
    pub fn cycles(&self) -> f64 {
        self.size * self.complexity
    }
}

/// Snapshot of the network during one slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub slot: usize,
    pub users: Vec<UserState>,
    pub uavs: Vec<UavState>,
    pub catalog: ServiceCatalog,
    /// c_z per type [cycles/bit].
    pub complexity: Vec<f64>,
    /// A feasible placement found at build time.
    pub anchor: PlacementMatrix,
    pub placement: PlacementMatrix,
    pub tasks: Vec<TaskSpec>,
    /// K×M row-major achievable user→UAV rates [bit/s].
    pub user_uav_rate: Vec<f64>,
    /// M×M row-major achievable UAV→UAV rates [bit/s]; the diagonal is unused.
    pub uav_uav_rate: Vec<f64>,
    /// Local CPU frequency each user ran at in the previous slot [Hz].
    pub previous_user_freq: Vec<f64>,
}

impl WorldState {
    pub fn user_count(&self) -> usize {
        self.users.len()
    }

    pub fn uav_count(&self) -> usize {
        self.uavs.len()
    }

    pub fn type_count(&self) -> usize {
        self.complexity.len()
    }

    pub fn uplink_rate(&self, k: usize, m: usize) -> f64 {
        self.user_uav_rate[k * self.uav_count() + m]
    }

    pub fn relay_rate(&self, m: usize, n: usize) -> f64 {
        self.uav_uav_rate[m * self.uav_count() + n]
    }

    pub fn uav_positions(&self) -> Vec<Vec3> {
        self.uavs.iter().map(|u| u.position).collect()
    }

    /// Draws one task per user: size uniform in the configured range, type uniform.
    pub fn sample_tasks<R: Rng + ?Sized>(&mut self, cfg: &ScenarioConfig, rng: &mut R) {
        let [lo, hi] = cfg.resources.task_size_bits;
        let types = self.type_count();
        self.tasks = (0..self.user_count())
            .map(|_| {
                let size = if hi > lo { rng.random_range(lo..=hi) } else { lo };
                let kind = rng.random_range(0..types);
                TaskSpec {
                    size,
                    kind,
                    complexity: self.complexity[kind],
                }
            })
            .collect();
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

/// Builds the static layout of a scenario from `cfg.seed`.
///
/// Users are uniform on the ground square, UAVs uniform in the flight box,
/// each user hosts each service type locally with probability
/// `local_service_prob`. Tasks and channel rates are left empty for the
/// environment to sample.
pub fn build_scenario(cfg: &ScenarioConfig) -> Result<WorldState, ConfigError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (lo, hi) = (cfg.area_min, cfg.area_max);
    let users = (0..cfg.users)
        .map(|_| {
            let position = Vec3::new(uniform(&mut rng, lo, hi), uniform(&mut rng, lo, hi), 0.0);
            let local_services = (0..cfg.service_types)
                .map(|_| rng.random_bool(cfg.resources.local_service_prob))
                .collect();
            UserState {
                position,
                local_services,
            }
        })
        .collect();
    let uavs = (0..cfg.uavs)
        .map(|_| UavState {
            position: Vec3::new(
                uniform(&mut rng, lo, hi),
                uniform(&mut rng, lo, hi),
                uniform(&mut rng, cfg.min_altitude, cfg.max_altitude),
            ),
            velocity: Vec3::zeros(),
        })
        .collect();
    let [c_lo, c_hi] = cfg.resources.task_complexity;
    let complexity = (0..cfg.service_types).map(|_| uniform(&mut rng, c_lo, c_hi)).collect();
    let catalog = ServiceCatalog::sample(cfg, &mut rng)?;
    let anchor = coverage_anchor(&catalog).expect("catalog sampling guarantees coverage");
    Ok(WorldState {
        slot: 0,
        users,
        uavs,
        complexity,
        placement: anchor.clone(),
        anchor,
        catalog,
        tasks: Vec::new(),
        user_uav_rate: vec![0.0; cfg.users * cfg.uavs],
        uav_uav_rate: vec![0.0; cfg.uavs * cfg.uavs],
        previous_user_freq: vec![0.0; cfg.users],
    })
}

/// Advances one slot: q' = q + v·δ with altitude clipped to the flight band.
/// Horizontal position is left unclipped; leaving the area is penalised.
pub fn step_kinematics(uav: &UavState, delta: f64, cfg: &ScenarioConfig) -> UavState {
    let mut position = uav.position + uav.velocity * delta;
    position.z = position.z.clamp(cfg.min_altitude, cfg.max_altitude);
    UavState {
        position,
        velocity: uav.velocity,
    }
}

/// Converts (speed, pitch, yaw) to a Cartesian velocity.
pub fn velocity_from_controls(speed: f64, pitch: f64, yaw: f64) -> Vec3 {
    Vec3::new(
        speed * pitch.cos() * yaw.cos(),
        speed * pitch.cos() * yaw.sin(),
        speed * pitch.sin(),
    )
}

/// Rotary-wing propulsion power [W] at horizontal-equivalent speed `speed`.
pub fn propulsion_power(speed: f64, p: &PropulsionParams) -> Result<f64, DomainError> {
    if !(speed >= 0.0) || !speed.is_finite() {
        return Err(DomainError::NegativeSpeed(speed));
    }
    let s2 = speed * speed;
    let s3 = s2 * speed;
    let v0_2 = p.mean_rotor_velocity * p.mean_rotor_velocity;
    let parasite = 0.5 * p.fuselage_drag_ratio * p.air_density * p.rotor_solidity * p.rotor_area * s3;
    let blade = p.blade_profile_power * (1.0 + 3.0 * s3 / (p.tip_speed * p.tip_speed));
    // sqrt(1 + x²) - x with x = s²/(2 v0²), written to avoid cancellation at speed.
    let x = s2 / (2.0 * v0_2);
    let induced_ratio = 1.0 / ((1.0 + x * x).sqrt() + x);
    let induced = p.induced_power * induced_ratio.sqrt();
    Ok(parasite + blade + induced)
}

/// All unordered UAV pairs closer than `min_distance`.
pub fn safety_violations(positions: &[Vec3], min_distance: f64) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for i in 0..positions.len() {
        for j in i + 1..positions.len() {
            if (positions[i] - positions[j]).norm() < min_distance {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

/// Horizontal distance from `q` to the service square [min, max]².
pub fn out_of_bounds_excess(q: &Vec3, area_min: f64, area_max: f64) -> f64 {
    let dx = q.x - q.x.clamp(area_min, area_max);
    let dy = q.y - q.y.clamp(area_min, area_max);
    dx.hypot(dy)
}
