//! Per-slot delay and energy along the local, uplink, relay and UAV-compute
//! pipeline, and the weighted system energy.

use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::error::DecisionError;
use crate::world::{TaskSpec, WorldState};

/// Delay reported for a branch that cannot make progress, in slot durations.
pub const TIMEOUT_SLOTS: f64 = 10.0;

/// Delay [s] and energy [J] of one pipeline stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageCost {
    pub delay: f64,
    pub energy: f64,
}

impl StageCost {
    pub const ZERO: StageCost = StageCost {
        delay: 0.0,
        energy: 0.0,
    };
}

/// Executable decisions for one slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotDecision {
    /// Serving UAV m of each user.
    pub serving: Vec<usize>,
    /// Offloaded fraction ρ of each user's task.
    pub offload_ratio: Vec<f64>,
    /// UAV n that computes each user's offloaded share.
    pub relay: Vec<usize>,
    /// Cycles/s granted to each user's offloaded share on its computing UAV.
    pub uav_freq: Vec<f64>,
    /// Local cycles/s of each user.
    pub user_freq: Vec<f64>,
}

/// Cost of one user's task split into stages.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct UserCost {
    pub local: StageCost,
    pub uplink: StageCost,
    pub relay: StageCost,
    pub compute: StageCost,
}

impl UserCost {
    pub fn delay(&self) -> f64 {
        total_user_delay(self)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub e_local: f64,
    pub e_uplink: f64,
    pub e_relay: f64,
    pub e_uav_compute: f64,
    pub e_fly: f64,
    pub e_weighted_total: f64,
}

impl EnergyBreakdown {
    pub fn user_side(&self) -> f64 {
        self.e_local + self.e_uplink
    }

    pub fn uav_side(&self) -> f64 {
        self.e_relay + self.e_uav_compute + self.e_fly
    }
}

fn check_ratio(rho: f64) -> Result<(), DecisionError> {
    if (0.0..=1.0).contains(&rho) {
        Ok(())
    } else {
        Err(DecisionError::RatioOutOfRange(rho))
    }
}

/// Local share d·(1−ρ) processed at `f_user`: t = d_l·c/f, E = κ·d_l·c·f².
pub fn local_delay_energy(task: &TaskSpec, rho: f64, f_user: f64, kappa: f64) -> Result<StageCost, DecisionError> {
    check_ratio(rho)?;
    let cycles = task.size * (1.0 - rho) * task.complexity;
    if cycles == 0.0 {
        return Ok(StageCost::ZERO);
    }
    if !(f_user > 0.0) {
        return Err(DecisionError::NoLocalFrequency);
    }
    Ok(StageCost {
        delay: cycles / f_user,
        energy: kappa * cycles * f_user * f_user,
    })
}

/// Transmission of `bits` at `rate` with power `power`; a dead link with
/// payload reports the timeout sentinel and the energy spent trying.
fn transmission(bits: f64, rate: f64, power: f64, slot: f64) -> StageCost {
    if bits == 0.0 {
        return StageCost::ZERO;
    }
    let delay = if rate > 0.0 { bits / rate } else { TIMEOUT_SLOTS * slot };
    StageCost {
        delay,
        energy: power * delay,
    }
}

/// Uplink of the offloaded share ρ·d to the serving UAV.
pub fn uplink_delay_energy(
    task: &TaskSpec,
    rho: f64,
    rate: f64,
    tx_power: f64,
    slot: f64,
) -> Result<StageCost, DecisionError> {
    check_ratio(rho)?;
    Ok(transmission(rho * task.size, rate, tx_power, slot))
}

/// Forwarding of the offloaded share from serving UAV `m` to computing UAV `n`.
pub fn relay_delay_energy(
    task: &TaskSpec,
    rho: f64,
    m: usize,
    n: usize,
    rate: f64,
    tx_power: f64,
    slot: f64,
) -> Result<StageCost, DecisionError> {
    check_ratio(rho)?;
    if m == n {
        return Ok(StageCost::ZERO);
    }
    Ok(transmission(rho * task.size, rate, tx_power, slot))
}

/// Offloaded share computed at `freq`: t = d_o·c/f, E = κ·d_o·c·f².
/// Without any frequency the stage reports the timeout sentinel and no energy.
pub fn uav_compute_delay_energy(
    task: &TaskSpec,
    rho: f64,
    freq: f64,
    kappa: f64,
    slot: f64,
) -> Result<StageCost, DecisionError> {
    check_ratio(rho)?;
    let cycles = rho * task.size * task.complexity;
    if cycles == 0.0 {
        return Ok(StageCost::ZERO);
    }
    if !(freq > 0.0) {
        return Ok(StageCost {
            delay: TIMEOUT_SLOTS * slot,
            energy: 0.0,
        });
    }
    Ok(StageCost {
        delay: cycles / freq,
        energy: kappa * cycles * freq * freq,
    })
}

/// The local branch runs in parallel with the sequential offload chain.
pub fn total_user_delay(cost: &UserCost) -> f64 {
    cost.local
        .delay
        .max(cost.uplink.delay + cost.relay.delay + cost.compute.delay)
}

/// Smallest frequency finishing `cycles` within `time`, capped at `cap`.
/// Returns `cap` when no time is left.
pub fn just_in_time_frequency(cycles: f64, time: f64, cap: f64) -> f64 {
    if cycles <= 0.0 {
        0.0
    } else if time > 0.0 {
        (cycles / time).min(cap)
    } else {
        cap
    }
}

/// Sums per-user energy, weighting UAV-side terms by `omega`.
/// `fly_energy` is the fleet propulsion energy of the slot.
pub fn slot_energy(users: &[UserCost], fly_energy: f64, omega: f64) -> EnergyBreakdown {
    let mut e = EnergyBreakdown {
        e_fly: fly_energy,
        ..Default::default()
    };
    for u in users {
        e.e_local += u.local.energy;
        e.e_uplink += u.uplink.energy;
        e.e_relay += u.relay.energy;
        e.e_uav_compute += u.compute.energy;
    }
    e.e_weighted_total = (e.e_local + e.e_uplink) + omega * (e.e_relay + e.e_uav_compute + e.e_fly);
    e
}

/// Time left for UAV computation after uplink and relay of user `k`'s
/// offloaded share.
pub fn compute_window(world: &WorldState, cfg: &ScenarioConfig, k: usize, m: usize, n: usize, rho: f64) -> f64 {
    let task = &world.tasks[k];
    let bits = rho * task.size;
    let slot = cfg.slot_duration;
    let up = transmission(bits, world.uplink_rate(k, m), 0.0, slot).delay;
    let relay = if m == n {
        0.0
    } else {
        transmission(bits, world.relay_rate(m, n), 0.0, slot).delay
    };
    slot - up - relay
}

/// Runs every user's task through the pipeline under `decision`.
pub fn evaluate_users(
    world: &WorldState,
    decision: &SlotDecision,
    cfg: &ScenarioConfig,
) -> Result<Vec<UserCost>, DecisionError> {
    let res = &cfg.resources;
    let kappa = res.effective_capacitance;
    let slot = cfg.slot_duration;
    world
        .tasks
        .iter()
        .enumerate()
        .map(|(k, task)| {
            let rho = decision.offload_ratio[k];
            let (m, n) = (decision.serving[k], decision.relay[k]);
            Ok(UserCost {
                local: local_delay_energy(task, rho, decision.user_freq[k], kappa)?,
                uplink: uplink_delay_energy(task, rho, world.uplink_rate(k, m), res.user_tx_power, slot)?,
                relay: relay_delay_energy(task, rho, m, n, world.relay_rate(m, n), res.uav_tx_power, slot)?,
                compute: uav_compute_delay_energy(task, rho, decision.uav_freq[k], kappa, slot)?,
            })
        })
        .collect()
}
