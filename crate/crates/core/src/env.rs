//! Episodic decision process over the simulator: state assembly, action
//! decoding, penalised reward and the reset/step loop.
//!
//! Action layout (all entries in [-1, 1]):
//! `[K×M scheduling | M×Z placement | K×M relay | K split | K share | M×3 velocity]`.
//!
//! State layout (all entries in [0, 1]):
//! `[M memory used | M storage used | K×(size, complexity) | K user freq | K×M uplink rates | M×M relay rates | M×3 positions]`.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{reference_relay_rate, reference_user_rate, sample_link_rates};
use crate::config::ScenarioConfig;
use crate::energy::{
    compute_window, evaluate_users, just_in_time_frequency, slot_energy, EnergyBreakdown, SlotDecision, UserCost,
};
use crate::error::EnvError;
use crate::placement::{fixed_service_placement, repair_placement, PlacementMatrix};
use crate::world::{
    build_scenario, out_of_bounds_excess, propulsion_power, step_kinematics, velocity_from_controls, Vec3, WorldState,
};

/// How the environment interprets the placement and compute-share controls.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecodingMode {
    /// Every control comes from the action.
    #[default]
    Learned,
    /// Placement is frozen at episode start and placement controls are ignored.
    FixedPlacement,
    /// Each UAV divides its CPU equally among the users it computes for.
    EqualShare,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvOptions {
    pub mode: DecodingMode,
    /// Keep the user→UAV association chosen at the first step for the whole episode.
    pub fix_association: bool,
    /// Cap each softmax share at the frequency that just meets the deadline
    /// and hand the spare capacity to users still below their own cap.
    pub deadline_capped_compute: bool,
}

impl Default for EnvOptions {
    fn default() -> Self {
        Self {
            mode: DecodingMode::Learned,
            fix_association: false,
            deadline_capped_compute: true,
        }
    }
}

/// Penalty multipliers of one slot, each ≥ 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyTerms {
    pub p_tm: f64,
    pub p_dis: f64,
    pub p_ob: f64,
}

impl PenaltyTerms {
    pub fn product(&self) -> f64 {
        self.p_tm * self.p_dis * self.p_ob
    }
}

/// Offsets of each block in the flat action vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActionLayout {
    pub users: usize,
    pub uavs: usize,
    pub types: usize,
}

impl ActionLayout {
    pub fn scheduling(&self) -> usize {
        0
    }
    pub fn placement(&self) -> usize {
        self.users * self.uavs
    }
    pub fn relay(&self) -> usize {
        self.placement() + self.uavs * self.types
    }
    pub fn split(&self) -> usize {
        self.relay() + self.users * self.uavs
    }
    pub fn share(&self) -> usize {
        self.split() + self.users
    }
    pub fn velocity(&self) -> usize {
        self.share() + self.users
    }
    pub fn dim(&self) -> usize {
        self.velocity() + 3 * self.uavs
    }
}

/// Everything an action decodes to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodedAction {
    pub decision: SlotDecision,
    pub placement: PlacementMatrix,
    pub velocities: Vec<Vec3>,
}

/// Costs of executing a decoded action in the current slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotOutcome {
    pub users: Vec<UserCost>,
    pub delays: Vec<f64>,
    pub energy: EnergyBreakdown,
    pub penalties: PenaltyTerms,
    pub reward: f64,
}

impl SlotOutcome {
    /// Penalised cost, the negated reward.
    pub fn cost(&self) -> f64 {
        -self.reward
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub slot: usize,
    pub energy: EnergyBreakdown,
    pub penalties: PenaltyTerms,
    /// Users whose task missed the slot deadline.
    pub timeouts: usize,
    /// Unordered UAV pairs closer than the safety distance.
    pub unsafe_pairs: usize,
    /// UAVs outside the service area.
    pub out_of_bounds: usize,
    /// UAV positions at which the slot was evaluated.
    pub positions: Vec<Vec3>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub state: Vec<f64>,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

/// One line of the per-step JSON trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: usize,
    pub reward: f64,
    pub energy: EnergyBreakdown,
    pub penalties: PenaltyTerms,
    pub positions: Vec<[f64; 3]>,
}

impl TraceRecord {
    pub fn from_step(step: &Step) -> Self {
        Self {
            t: step.info.slot,
            reward: step.reward,
            energy: step.info.energy,
            penalties: step.info.penalties,
            positions: step.info.positions.iter().map(|p| [p.x, p.y, p.z]).collect(),
        }
    }
}

/// P(a, b, c) = 2 − exp(−max(0, (a − b)/c)), in [1, 2).
pub fn penalty(a: f64, b: f64, c: f64) -> f64 {
    2.0 - (-((a - b) / c).max(0.0)).exp()
}

/// Mean over users of P(t_k, δ, δ).
pub fn timeout_penalty(delays: &[f64], slot: f64) -> f64 {
    if delays.is_empty() {
        return 1.0;
    }
    delays.iter().map(|&t| penalty(t, slot, slot)).sum::<f64>() / delays.len() as f64
}

/// Mean over ordered UAV pairs of P(d_min, ‖q_m − q_n‖, d_min); 1 for a single UAV.
pub fn distance_penalty(positions: &[Vec3], min_distance: f64) -> f64 {
    let m = positions.len();
    if m < 2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for i in 0..m {
        for j in 0..m {
            if i != j {
                sum += penalty(min_distance, (positions[i] - positions[j]).norm(), min_distance);
            }
        }
    }
    sum / (m * (m - 1)) as f64
}

/// Mean over UAVs of 1 + excess/W.
pub fn bounds_penalty(positions: &[Vec3], cfg: &ScenarioConfig) -> f64 {
    if positions.is_empty() {
        return 1.0;
    }
    positions
        .iter()
        .map(|q| 1.0 + out_of_bounds_excess(q, cfg.area_min, cfg.area_max) / cfg.out_of_bounds_scale)
        .sum::<f64>()
        / positions.len() as f64
}

/// r = −E_w · P_tm · P_dis · p_ob.
pub fn compute_reward(
    energy: &EnergyBreakdown,
    delays: &[f64],
    positions: &[Vec3],
    cfg: &ScenarioConfig,
) -> (f64, PenaltyTerms) {
    let terms = PenaltyTerms {
        p_tm: timeout_penalty(delays, cfg.slot_duration),
        p_dis: distance_penalty(positions, cfg.safety_distance),
        p_ob: bounds_penalty(positions, cfg),
    };
    (-energy.e_weighted_total * terms.product(), terms)
}

/// Grants each claimant `min(cap_i, x·w_i)` with x chosen so the grants use
/// `capacity` unless every claimant is capped first.
pub fn water_fill(weights: &[f64], caps: &[f64], capacity: f64) -> Vec<f64> {
    let mut grant = vec![0.0; weights.len()];
    let mut open: Vec<usize> = (0..weights.len()).collect();
    let mut remaining = capacity;
    while !open.is_empty() && remaining > 0.0 {
        let total: f64 = open.iter().map(|&i| weights[i]).sum();
        let x = remaining / total;
        let saturated: Vec<usize> = open.iter().copied().filter(|&i| caps[i] <= x * weights[i]).collect();
        if saturated.is_empty() {
            for &i in &open {
                grant[i] = x * weights[i];
            }
            break;
        }
        for &i in &saturated {
            grant[i] = caps[i];
            remaining -= caps[i];
        }
        open.retain(|i| !saturated.contains(i));
    }
    grant
}

fn argmax(values: impl Iterator<Item = (usize, f64)>) -> usize {
    let mut best = (usize::MAX, f64::NEG_INFINITY);
    for (i, v) in values {
        if best.0 == usize::MAX || v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

fn unit(x: f64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        ((x - lo) / (hi - lo)).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

pub struct Environment {
    cfg: ScenarioConfig,
    opts: EnvOptions,
    layout: ActionLayout,
    template: WorldState,
    world: WorldState,
    rng: ChaCha8Rng,
    ready: bool,
    done: bool,
    association: Option<Vec<usize>>,
    user_rate_scale: f64,
    relay_rate_scale: f64,
}

impl Environment {
    /// Builds the scenario layout from `cfg.seed`.
    pub fn new(cfg: ScenarioConfig, opts: EnvOptions) -> Result<Self, EnvError> {
        let template = build_scenario(&cfg)?;
        let layout = ActionLayout {
            users: cfg.users,
            uavs: cfg.uavs,
            types: cfg.service_types,
        };
        Ok(Self {
            user_rate_scale: reference_user_rate(&cfg),
            relay_rate_scale: reference_relay_rate(&cfg),
            world: template.clone(),
            template,
            layout,
            opts,
            cfg,
            rng: ChaCha8Rng::seed_from_u64(0),
            ready: false,
            done: false,
            association: None,
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn options(&self) -> &EnvOptions {
        &self.opts
    }

    pub fn layout(&self) -> ActionLayout {
        self.layout
    }

    pub fn world(&self) -> &WorldState {
        &self.world
    }

    pub fn action_dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn state_dim(&self) -> usize {
        let (k, m) = (self.cfg.users, self.cfg.uavs);
        2 * m + 3 * k + k * m + m * m + 3 * m
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// Starts an episode from the scenario layout; `episode_seed` drives
    /// tasks and fading for the whole episode.
    pub fn reset(&mut self, episode_seed: u64) -> Vec<f64> {
        self.world = self.template.clone();
        self.rng = ChaCha8Rng::seed_from_u64(episode_seed);
        if self.opts.mode == DecodingMode::FixedPlacement {
            self.world.placement = fixed_service_placement(&self.world.catalog, &self.world.anchor);
        }
        self.world.sample_tasks(&self.cfg, &mut self.rng);
        sample_link_rates(&mut self.world, &self.cfg, &mut self.rng);
        self.ready = true;
        self.done = false;
        self.association = None;
        self.observe()
    }

    /// Normalised view of the current slot.
    pub fn observe(&self) -> Vec<f64> {
        let w = &self.world;
        let cfg = &self.cfg;
        let res = &cfg.resources;
        let mut s = Vec::with_capacity(self.state_dim());
        for m in 0..w.uav_count() {
            s.push(unit(w.placement.memory_used(m, &w.catalog), 0.0, w.catalog.memory_budget[m]));
        }
        for m in 0..w.uav_count() {
            s.push(unit(w.placement.storage_used(m, &w.catalog), 0.0, w.catalog.storage_budget[m]));
        }
        for t in &w.tasks {
            s.push(unit(t.size, res.task_size_bits[0], res.task_size_bits[1]));
            s.push(unit(t.complexity, res.task_complexity[0], res.task_complexity[1]));
        }
        for &f in &w.previous_user_freq {
            s.push(unit(f, 0.0, res.user_cpu_hz));
        }
        for &r in &w.user_uav_rate {
            s.push(unit(r, 0.0, self.user_rate_scale));
        }
        let m_count = w.uav_count();
        for (i, &r) in w.uav_uav_rate.iter().enumerate() {
            // A UAV reaches itself at no cost.
            let v = if i / m_count == i % m_count { 1.0 } else { unit(r, 0.0, self.relay_rate_scale) };
            s.push(v);
        }
        for u in &w.uavs {
            s.push(unit(u.position.x, cfg.area_min, cfg.area_max));
            s.push(unit(u.position.y, cfg.area_min, cfg.area_max));
            s.push(unit(u.position.z, cfg.min_altitude, cfg.max_altitude));
        }
        s
    }

    fn check_action(&self, action: &[f64]) -> Result<(), EnvError> {
        if action.len() != self.action_dim() {
            return Err(EnvError::ActionDimension {
                expected: self.action_dim(),
                got: action.len(),
            });
        }
        if let Some(i) = action.iter().position(|a| !a.is_finite()) {
            return Err(EnvError::NonFiniteAction(i));
        }
        Ok(())
    }

    /// Decodes `action` against the current slot without advancing it.
    pub fn decode(&self, action: &[f64]) -> Result<DecodedAction, EnvError> {
        self.check_action(action)?;
        let a: Vec<f64> = action.iter().map(|x| x.clamp(-1.0, 1.0)).collect();
        let w = &self.world;
        let cfg = &self.cfg;
        let lay = self.layout;
        let (k_count, m_count) = (lay.users, lay.uavs);

        let serving: Vec<usize> = match &self.association {
            Some(fixed) => fixed.clone(),
            None => (0..k_count)
                .map(|k| argmax((0..m_count).map(|m| (m, a[lay.scheduling() + k * m_count + m]))))
                .collect(),
        };

        let placement = match self.opts.mode {
            DecodingMode::FixedPlacement => w.placement.clone(),
            _ => repair_placement(&a[lay.placement()..lay.relay()], &w.catalog, &w.anchor)
                .expect("action entries are finite and shaped"),
        };

        let relay: Vec<usize> = (0..k_count)
            .map(|k| {
                let z = w.tasks[k].kind;
                argmax(placement.hosts(z).map(|n| (n, a[lay.relay() + k * m_count + n])))
            })
            .collect();

        let offload_ratio: Vec<f64> = (0..k_count)
            .map(|k| {
                if w.users[k].local_services[w.tasks[k].kind] {
                    (a[lay.split() + k] + 1.0) / 2.0
                } else {
                    1.0
                }
            })
            .collect();

        let user_freq: Vec<f64> = (0..k_count)
            .map(|k| {
                let t = &w.tasks[k];
                let cycles = t.size * (1.0 - offload_ratio[k]) * t.complexity;
                just_in_time_frequency(cycles, cfg.slot_duration, cfg.resources.user_cpu_hz)
            })
            .collect();

        let capacity = cfg.resources.uav_cpu_hz;
        let mut uav_freq = vec![0.0; k_count];
        for n in 0..m_count {
            let group: Vec<usize> = (0..k_count)
                .filter(|&k| relay[k] == n && offload_ratio[k] * w.tasks[k].cycles() > 0.0)
                .collect();
            if group.is_empty() {
                continue;
            }
            let grants = match self.opts.mode {
                DecodingMode::EqualShare => vec![capacity / group.len() as f64; group.len()],
                _ => {
                    let logits: Vec<f64> = group.iter().map(|&k| a[lay.share() + k]).collect();
                    let top = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let weights: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
                    if self.opts.deadline_capped_compute {
                        let caps: Vec<f64> = group
                            .iter()
                            .map(|&k| {
                                let rho = offload_ratio[k];
                                let window = compute_window(w, cfg, k, serving[k], n, rho);
                                just_in_time_frequency(rho * w.tasks[k].cycles(), window, f64::INFINITY)
                            })
                            .collect();
                        water_fill(&weights, &caps, capacity)
                    } else {
                        let total: f64 = weights.iter().sum();
                        weights.iter().map(|x| capacity * x / total).collect()
                    }
                }
            };
            for (&k, g) in group.iter().zip(grants) {
                uav_freq[k] = g;
            }
        }

        let velocities = (0..m_count)
            .map(|m| {
                let v = &a[lay.velocity() + 3 * m..lay.velocity() + 3 * m + 3];
                let speed = (v[0] + 1.0) / 2.0 * cfg.max_speed;
                velocity_from_controls(speed, v[1] * FRAC_PI_2, v[2] * PI)
            })
            .collect();

        Ok(DecodedAction {
            decision: SlotDecision {
                serving,
                offload_ratio,
                relay,
                uav_freq,
                user_freq,
            },
            placement,
            velocities,
        })
    }

    /// Costs of `decoded` in the current slot at the current UAV positions.
    pub fn evaluate(&self, decoded: &DecodedAction) -> SlotOutcome {
        evaluate_slot(&self.world, decoded, &self.cfg)
    }

    pub fn step(&mut self, action: &[f64]) -> Result<Step, EnvError> {
        if !self.ready {
            return Err(EnvError::NotReset);
        }
        if self.done {
            return Err(EnvError::EpisodeFinished);
        }
        let decoded = self.decode(action)?;
        let outcome = self.evaluate(&decoded);
        let positions = self.world.uav_positions();
        let info = StepInfo {
            slot: self.world.slot,
            energy: outcome.energy,
            penalties: outcome.penalties,
            timeouts: outcome.delays.iter().filter(|&&t| t > self.cfg.slot_duration).count(),
            unsafe_pairs: crate::world::safety_violations(&positions, self.cfg.safety_distance).len(),
            out_of_bounds: positions
                .iter()
                .filter(|q| out_of_bounds_excess(q, self.cfg.area_min, self.cfg.area_max) > 0.0)
                .count(),
            positions,
        };

        if self.opts.fix_association && self.association.is_none() {
            self.association = Some(decoded.decision.serving.clone());
        }
        let w = &mut self.world;
        w.placement = decoded.placement;
        for (uav, v) in w.uavs.iter_mut().zip(&decoded.velocities) {
            uav.velocity = *v;
            *uav = step_kinematics(uav, self.cfg.slot_duration, &self.cfg);
        }
        w.previous_user_freq = decoded.decision.user_freq;
        w.slot += 1;
        self.done = w.slot >= self.cfg.horizon;
        w.sample_tasks(&self.cfg, &mut self.rng);
        sample_link_rates(w, &self.cfg, &mut self.rng);

        Ok(Step {
            state: self.observe(),
            reward: outcome.reward,
            done: self.done,
            info,
        })
    }
}

/// Runs `decoded` through the pipeline on `world` and scores it. Propulsion
/// is charged at the commanded speeds; penalties use the current positions.
pub fn evaluate_slot(world: &WorldState, decoded: &DecodedAction, cfg: &ScenarioConfig) -> SlotOutcome {
    let users = evaluate_users(world, &decoded.decision, cfg).expect("decoded decisions are executable");
    let fly: f64 = decoded
        .velocities
        .iter()
        .map(|v| propulsion_power(v.norm(), &cfg.propulsion).expect("speed is a norm") * cfg.slot_duration)
        .sum();
    let energy = slot_energy(&users, fly, cfg.uav_energy_weight);
    let delays: Vec<f64> = users.iter().map(|u| u.delay()).collect();
    let (reward, penalties) = compute_reward(&energy, &delays, &world.uav_positions(), cfg);
    SlotOutcome {
        users,
        delays,
        energy,
        penalties,
        reward,
    }
}
