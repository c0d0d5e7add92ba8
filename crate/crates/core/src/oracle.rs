//! Brute-force single-slot optimum for tiny instances.
//!
//! Geometry and channels are frozen and UAVs hover, so the objective is the
//! penalised cost E_w·P_tm·P_dis·p_ob of one slot. The search covers every
//! association, every relay target reachable under some feasible placement,
//! offload ratios on a grid with local refinement, and just-in-time CPU
//! frequencies. When two users overload one UAV the split of its CPU is
//! searched on a grid too.

use crate::config::ScenarioConfig;
use crate::energy::{compute_window, just_in_time_frequency, SlotDecision};
use crate::env::{evaluate_slot, DecodedAction, SlotOutcome};
use crate::error::OracleError;
use crate::placement::{enumerate_feasible_placements, PlacementMatrix};
use crate::world::{Vec3, WorldState};

pub const MAX_ORACLE_USERS: usize = 2;
pub const MAX_ORACLE_UAVS: usize = 2;
pub const MAX_ORACLE_TYPES: usize = 2;
/// Offload-ratio grid points per user.
pub const RATIO_GRID: usize = 101;
const SPLIT_GRID: usize = 21;
const GOLDEN_ITERS: usize = 80;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub decoded: DecodedAction,
    pub outcome: SlotOutcome,
}

impl OracleSolution {
    pub fn cost(&self) -> f64 {
        self.outcome.cost()
    }
}

/// `decoded` with every UAV hovering.
pub fn hovering(decoded: &DecodedAction) -> DecodedAction {
    DecodedAction {
        velocities: vec![Vec3::zeros(); decoded.velocities.len()],
        ..decoded.clone()
    }
}

/// Scores `decoded` on the frozen slot with every UAV hovering.
pub fn hover_outcome(world: &WorldState, cfg: &ScenarioConfig, decoded: &DecodedAction) -> SlotOutcome {
    evaluate_slot(world, &hovering(decoded), cfg)
}

struct Search<'a> {
    world: &'a WorldState,
    cfg: &'a ScenarioConfig,
    placement: &'a PlacementMatrix,
    serving: Vec<usize>,
    relay: Vec<usize>,
}

impl Search<'_> {
    fn decoded(&self, rho: &[f64], split: f64) -> DecodedAction {
        let w = self.world;
        let cfg = self.cfg;
        let k_count = w.user_count();
        let user_freq = (0..k_count)
            .map(|k| {
                let cycles = w.tasks[k].cycles() * (1.0 - rho[k]);
                just_in_time_frequency(cycles, cfg.slot_duration, cfg.resources.user_cpu_hz)
            })
            .collect();
        let cap = cfg.resources.uav_cpu_hz;
        let mut uav_freq = vec![0.0; k_count];
        for n in 0..w.uav_count() {
            let group: Vec<usize> = (0..k_count)
                .filter(|&k| self.relay[k] == n && rho[k] * w.tasks[k].cycles() > 0.0)
                .collect();
            let wants: Vec<f64> = group
                .iter()
                .map(|&k| {
                    let window = compute_window(w, cfg, k, self.serving[k], n, rho[k]);
                    just_in_time_frequency(rho[k] * w.tasks[k].cycles(), window, f64::INFINITY)
                })
                .collect();
            let total: f64 = wants.iter().sum();
            for (i, &k) in group.iter().enumerate() {
                uav_freq[k] = if total <= cap {
                    wants[i]
                } else if group.len() == 1 {
                    cap
                } else {
                    let share = if i == 0 { split } else { 1.0 - split };
                    wants[i].min(share * cap)
                };
            }
        }
        DecodedAction {
            decision: SlotDecision {
                serving: self.serving.clone(),
                offload_ratio: rho.to_vec(),
                relay: self.relay.clone(),
                uav_freq,
                user_freq,
            },
            placement: self.placement.clone(),
            velocities: vec![Vec3::zeros(); w.uav_count()],
        }
    }

    fn overloaded(&self, rho: &[f64]) -> bool {
        let w = self.world;
        (0..w.uav_count()).any(|n| {
            let group: Vec<usize> = (0..w.user_count())
                .filter(|&k| self.relay[k] == n && rho[k] * w.tasks[k].cycles() > 0.0)
                .collect();
            group.len() > 1 && {
                let wants: f64 = group
                    .iter()
                    .map(|&k| {
                        let window = compute_window(w, self.cfg, k, self.serving[k], n, rho[k]);
                        just_in_time_frequency(rho[k] * w.tasks[k].cycles(), window, f64::INFINITY)
                    })
                    .sum();
                wants > self.cfg.resources.uav_cpu_hz
            }
        })
    }

    /// Best cost over CPU splits at fixed ratios.
    fn best(&self, rho: &[f64]) -> (f64, DecodedAction) {
        let splits: Vec<f64> = if self.overloaded(rho) {
            (0..SPLIT_GRID).map(|i| i as f64 / (SPLIT_GRID - 1) as f64).collect()
        } else {
            vec![0.5]
        };
        let mut best: Option<(f64, DecodedAction)> = None;
        for s in splits {
            let d = self.decoded(rho, s);
            let c = evaluate_slot(self.world, &d, self.cfg).cost();
            if best.as_ref().is_none_or(|(b, _)| c < *b) {
                best = Some((c, d));
            }
        }
        best.expect("at least one split")
    }
}

fn golden<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..GOLDEN_ITERS {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

fn grid() -> Vec<f64> {
    (0..RATIO_GRID).map(|i| i as f64 / (RATIO_GRID - 1) as f64).collect()
}

/// Minimises over one free ratio: grid plus the local-capacity breakpoint,
/// then golden-section refinement around every grid-local minimum.
fn minimise_one(search: &Search, rho: &mut [f64], free: usize, best: &mut (f64, DecodedAction)) {
    let w = search.world;
    let mut xs = grid();
    let local_full = 1.0 - search.cfg.resources.user_cpu_hz * search.cfg.slot_duration / w.tasks[free].cycles();
    if local_full > 0.0 && local_full < 1.0 {
        xs.push(local_full);
    }
    xs.sort_by(f64::total_cmp);
    let mut eval = |x: f64, rho: &mut [f64]| {
        rho[free] = x;
        let (c, d) = search.best(rho);
        if c < best.0 {
            *best = (c, d);
        }
        c
    };
    let costs: Vec<f64> = xs.iter().map(|&x| eval(x, rho)).collect();
    for i in 0..xs.len() {
        let left = if i > 0 { costs[i - 1] } else { f64::INFINITY };
        let right = if i + 1 < xs.len() { costs[i + 1] } else { f64::INFINITY };
        if costs[i] <= left && costs[i] <= right {
            let lo = xs[i.saturating_sub(1)];
            let hi = xs[(i + 1).min(xs.len() - 1)];
            if hi > lo {
                golden(|x| eval(x, rho), lo, hi);
            }
        }
    }
}

/// Exhaustive single-slot optimum of the current slot of `world`.
pub fn solve_slot(world: &WorldState, cfg: &ScenarioConfig) -> Result<OracleSolution, OracleError> {
    let (k_count, m_count, z_count) = (world.user_count(), world.uav_count(), world.type_count());
    if k_count > MAX_ORACLE_USERS || m_count > MAX_ORACLE_UAVS || z_count > MAX_ORACLE_TYPES {
        return Err(OracleError::TooLarge {
            users: k_count,
            uavs: m_count,
            types: z_count,
        });
    }
    if world.tasks.len() != k_count || k_count == 0 {
        return Err(OracleError::NoTasks);
    }
    let placements: Vec<PlacementMatrix> = enumerate_feasible_placements(&world.catalog)?.collect();
    let free: Vec<usize> = (0..k_count)
        .filter(|&k| world.users[k].local_services[world.tasks[k].kind])
        .collect();

    let tuples: Vec<Vec<usize>> = (0..m_count.pow(k_count as u32))
        .map(|mut code| {
            (0..k_count)
                .map(|_| {
                    let m = code % m_count;
                    code /= m_count;
                    m
                })
                .collect()
        })
        .collect();

    let mut best: Option<(f64, DecodedAction)> = None;
    for serving in &tuples {
        for relay in &tuples {
            let Some(placement) = placements
                .iter()
                .find(|p| (0..k_count).all(|k| p.get(relay[k], world.tasks[k].kind)))
            else {
                continue;
            };
            let search = Search {
                world,
                cfg,
                placement,
                serving: serving.clone(),
                relay: relay.clone(),
            };
            let mut rho = vec![1.0; k_count];
            let mut local = search.best(&rho);
            match free.len() {
                0 => {}
                1 => minimise_one(&search, &mut rho, free[0], &mut local),
                _ => {
                    let xs = grid();
                    let mut at = rho.clone();
                    for &a in &xs {
                        for &b in &xs {
                            rho[free[0]] = a;
                            rho[free[1]] = b;
                            let (c, d) = search.best(&rho);
                            if c < local.0 {
                                local = (c, d);
                                at = rho.clone();
                            }
                        }
                    }
                    let step = 1.0 / (RATIO_GRID - 1) as f64;
                    for _ in 0..3 {
                        for &k in &free {
                            let mut r = at.clone();
                            let centre = at[k];
                            let (lo, hi) = ((centre - step).max(0.0), (centre + step).min(1.0));
                            golden(
                                |x| {
                                    r[k] = x;
                                    let (c, d) = search.best(&r);
                                    if c < local.0 {
                                        local = (c, d);
                                    }
                                    c
                                },
                                lo,
                                hi,
                            );
                            at = local.1.decision.offload_ratio.clone();
                        }
                    }
                }
            }
            if best.as_ref().is_none_or(|(b, _)| local.0 < *b) {
                best = Some(local);
            }
        }
    }
    let (_, decoded) = best.expect("anchor placement always admits a relay tuple");
    let outcome = evaluate_slot(world, &decoded, cfg);
    Ok(OracleSolution { decoded, outcome })
}
