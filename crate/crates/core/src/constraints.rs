//! Standalone checker for executable slot decisions.
//!
//! Recomputes every constraint from raw fields so it can audit the decoder.

use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::energy::SlotDecision;
use crate::placement::PlacementMatrix;
use crate::world::WorldState;

const SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    MemoryBudget { uav: usize },
    StorageBudget { uav: usize },
    UncoveredService { kind: usize },
    ServingIndex { user: usize },
    RelayIndex { user: usize },
    RelayWithoutService { user: usize, uav: usize },
    OffloadRatio { user: usize },
    LocalServiceMissing { user: usize },
    UavFrequency { user: usize },
    UavCapacity { uav: usize },
    UserFrequency { user: usize },
    ShapeMismatch,
}

pub fn check_decision(
    world: &WorldState,
    placement: &PlacementMatrix,
    decision: &SlotDecision,
    cfg: &ScenarioConfig,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let (k_count, m_count, z_count) = (world.user_count(), world.uav_count(), world.type_count());
    let cat = &world.catalog;
    if placement.uavs() != m_count
        || placement.types() != z_count
        || [
            decision.serving.len(),
            decision.offload_ratio.len(),
            decision.relay.len(),
            decision.uav_freq.len(),
            decision.user_freq.len(),
        ]
        .iter()
        .any(|&l| l != k_count)
    {
        return vec![Violation::ShapeMismatch];
    }

    for m in 0..m_count {
        let (mut mem, mut sto) = (0.0, 0.0);
        for z in 0..z_count {
            if placement.get(m, z) {
                mem += cat.memory_footprint[z];
                sto += cat.storage_footprint[z];
            }
        }
        if mem > cat.memory_budget[m] * (1.0 + SLACK) {
            out.push(Violation::MemoryBudget { uav: m });
        }
        if sto > cat.storage_budget[m] * (1.0 + SLACK) {
            out.push(Violation::StorageBudget { uav: m });
        }
    }
    for z in 0..z_count {
        if !(0..m_count).any(|m| placement.get(m, z)) {
            out.push(Violation::UncoveredService { kind: z });
        }
    }

    let f_uav = cfg.resources.uav_cpu_hz;
    let f_user = cfg.resources.user_cpu_hz;
    let mut load = vec![0.0; m_count];
    for k in 0..k_count {
        let z = world.tasks[k].kind;
        if decision.serving[k] >= m_count {
            out.push(Violation::ServingIndex { user: k });
        }
        let n = decision.relay[k];
        if n >= m_count {
            out.push(Violation::RelayIndex { user: k });
            continue;
        }
        let rho = decision.offload_ratio[k];
        if !(0.0..=1.0).contains(&rho) {
            out.push(Violation::OffloadRatio { user: k });
        }
        if !world.users[k].local_services[z] && rho != 1.0 {
            out.push(Violation::LocalServiceMissing { user: k });
        }
        let f = decision.uav_freq[k];
        if rho > 0.0 && !placement.get(n, z) {
            out.push(Violation::RelayWithoutService { user: k, uav: n });
        }
        if !(f >= 0.0) || f > f_uav * (1.0 + SLACK) || (f > 0.0 && !placement.get(n, z)) {
            out.push(Violation::UavFrequency { user: k });
        }
        load[n] += f;
        let fl = decision.user_freq[k];
        if !(fl >= 0.0) || fl > f_user * (1.0 + SLACK) {
            out.push(Violation::UserFrequency { user: k });
        }
    }
    for (n, &l) in load.iter().enumerate() {
        if l > f_uav * (1.0 + SLACK) {
            out.push(Violation::UavCapacity { uav: n });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{EnvOptions, Environment};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn env() -> Environment {
        let mut e = Environment::new(
            ScenarioConfig {
                seed: 12,
                ..ScenarioConfig::desk()
            },
            EnvOptions::default(),
        )
        .unwrap();
        e.reset(0);
        e
    }

    #[test]
    fn decoded_zero_action_is_clean() {
        let e = env();
        let d = e.decode(&vec![0.0; e.action_dim()]).unwrap();
        assert!(check_decision(e.world(), &d.placement, &d.decision, e.config()).is_empty());
    }

    #[test]
    fn detects_each_kind_of_violation() {
        let e = env();
        let w = e.world();
        let d = e.decode(&vec![0.0; e.action_dim()]).unwrap();
        let cfg = e.config();

        let mut bad = d.decision.clone();
        bad.uav_freq[0] = 2.0 * cfg.resources.uav_cpu_hz;
        assert!(check_decision(w, &d.placement, &bad, cfg).contains(&Violation::UavFrequency { user: 0 }));

        let mut bad = d.decision.clone();
        bad.offload_ratio[1] = 1.5;
        assert!(check_decision(w, &d.placement, &bad, cfg).contains(&Violation::OffloadRatio { user: 1 }));

        let empty = PlacementMatrix::empty(w.uav_count(), w.type_count());
        let v = check_decision(w, &empty, &d.decision, cfg);
        assert!(v.contains(&Violation::UncoveredService { kind: 0 }));

        let mut bad = d.decision.clone();
        bad.user_freq[2] = 5.0 * cfg.resources.user_cpu_hz;
        assert!(check_decision(w, &d.placement, &bad, cfg).contains(&Violation::UserFrequency { user: 2 }));

        let mut bad = d.decision.clone();
        bad.serving[0] = 99;
        assert!(check_decision(w, &d.placement, &bad, cfg).contains(&Violation::ServingIndex { user: 0 }));
    }

    #[test]
    fn random_actions_decode_cleanly() {
        let mut e = env();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for i in 0..2000 {
            let a: Vec<f64> = (0..e.action_dim()).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let d = e.decode(&a).unwrap();
            let v = check_decision(e.world(), &d.placement, &d.decision, e.config());
            assert!(v.is_empty(), "{v:?}");
            if i % 10 == 0 {
                e.step(&a).unwrap();
                if e.is_done() {
                    e.reset(i);
                }
            }
        }
    }
}
