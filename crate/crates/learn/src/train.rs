//! Episode rollouts, evaluation and the SAC training loop.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use uavmec_core::{EnergyBreakdown, Environment, Step};

use crate::policy::GaussianPolicy;
use crate::replay::ReplayBuffer;
use crate::sac::{SacAgent, SacConfig};
use crate::LearnError;

/// Episode seeds used for evaluation; training seeds come from a separate stream.
pub const EVAL_SEED_BASE: u64 = 0x5EED_0000_0000;

/// Episode seeds for final reporting, disjoint from the evaluation seeds
/// that pick the best policy during training.
pub const TEST_SEED_BASE: u64 = 0x7E57_0000_0000;

pub fn eval_seeds(count: usize) -> Vec<u64> {
    (0..count as u64).map(|i| EVAL_SEED_BASE + i).collect()
}

pub fn test_seeds(count: usize) -> Vec<u64> {
    (0..count as u64).map(|i| TEST_SEED_BASE + i).collect()
}

/// Totals of one episode.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EpisodeStats {
    pub steps: usize,
    pub ret: f64,
    pub energy: EnergyBreakdown,
    /// Fraction of user-slots that missed the deadline.
    pub timeout_rate: f64,
    /// Fraction of slots with at least one unsafe UAV pair.
    pub collision_rate: f64,
    /// Fraction of UAV-slots outside the service area.
    pub out_of_bounds_rate: f64,
}

fn accumulate(e: &mut EnergyBreakdown, s: &EnergyBreakdown) {
    e.e_local += s.e_local;
    e.e_uplink += s.e_uplink;
    e.e_relay += s.e_relay;
    e.e_uav_compute += s.e_uav_compute;
    e.e_fly += s.e_fly;
    e.e_weighted_total += s.e_weighted_total;
}

/// Plays one full episode with `act`, calling `on_step` after every transition.
pub fn run_episode(
    env: &mut Environment,
    seed: u64,
    mut act: impl FnMut(&[f64]) -> Vec<f64>,
    mut on_step: impl FnMut(&[f64], &[f64], &Step),
) -> Result<EpisodeStats, LearnError> {
    let mut state = env.reset(seed);
    let cfg = env.config();
    let (k, m) = (cfg.users as f64, cfg.uavs as f64);
    let mut stats = EpisodeStats::default();
    let (mut timeouts, mut collisions, mut outside) = (0usize, 0usize, 0usize);
    loop {
        let action = act(&state);
        let step = env.step(&action)?;
        if !step.reward.is_finite() {
            return Err(LearnError::NonFinite("reward"));
        }
        stats.steps += 1;
        stats.ret += step.reward;
        accumulate(&mut stats.energy, &step.info.energy);
        timeouts += step.info.timeouts;
        collisions += usize::from(step.info.unsafe_pairs > 0);
        outside += step.info.out_of_bounds;
        on_step(&state, &action, &step);
        let done = step.done;
        state = step.state;
        if done {
            break;
        }
    }
    let t = stats.steps as f64;
    stats.timeout_rate = timeouts as f64 / (t * k);
    stats.collision_rate = collisions as f64 / t;
    stats.out_of_bounds_rate = outside as f64 / (t * m);
    Ok(stats)
}

/// Averages of several evaluation episodes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    /// Training episodes completed when the evaluation ran.
    pub episode: usize,
    pub episodes: usize,
    pub mean_return: f64,
    /// Mean per-episode energy by component.
    pub energy: EnergyBreakdown,
    pub timeout_rate: f64,
    pub collision_rate: f64,
    pub out_of_bounds_rate: f64,
}

impl EvalSummary {
    pub fn mean_weighted_energy(&self) -> f64 {
        self.energy.e_weighted_total
    }

    pub fn from_episodes(episode: usize, all: &[EpisodeStats]) -> Self {
        let n = all.len().max(1) as f64;
        let mut s = EvalSummary {
            episode,
            episodes: all.len(),
            ..Default::default()
        };
        for e in all {
            s.mean_return += e.ret / n;
            s.timeout_rate += e.timeout_rate / n;
            s.collision_rate += e.collision_rate / n;
            s.out_of_bounds_rate += e.out_of_bounds_rate / n;
            let mut scaled = e.energy;
            for x in [
                &mut scaled.e_local,
                &mut scaled.e_uplink,
                &mut scaled.e_relay,
                &mut scaled.e_uav_compute,
                &mut scaled.e_fly,
                &mut scaled.e_weighted_total,
            ] {
                *x /= n;
            }
            accumulate(&mut s.energy, &scaled);
        }
        s
    }
}

/// Mean-action rollouts of `policy` on `seeds`.
pub fn evaluate_policy(env: &mut Environment, policy: &GaussianPolicy, seeds: &[u64]) -> Result<Vec<EpisodeStats>, LearnError> {
    seeds
        .iter()
        .map(|&s| run_episode(env, s, |st| policy.mean_action(st), |_, _, _| {}))
        .collect()
}

/// Uniform random actions in [-1, 1].
pub fn evaluate_random(env: &mut Environment, seeds: &[u64], rng_seed: u64) -> Result<Vec<EpisodeStats>, LearnError> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let dim = env.action_dim();
    seeds
        .iter()
        .map(|&s| {
            run_episode(
                env,
                s,
                |_| (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect(),
                |_, _, _| {},
            )
        })
        .collect()
}

/// One row of the training log.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub episode: usize,
    pub steps: usize,
    #[serde(rename = "return")]
    pub ret: f64,
    pub e_local: f64,
    pub e_uplink: f64,
    pub e_relay: f64,
    pub e_uav: f64,
    pub e_fly: f64,
    pub e_weighted: f64,
    pub p_tm_rate: f64,
    pub p_dis_rate: f64,
    pub p_ob_rate: f64,
    pub alpha: f64,
    pub loss_q: f64,
    pub loss_pi: f64,
}

impl EpisodeLog {
    fn new(episode: usize, s: &EpisodeStats) -> Self {
        Self {
            episode,
            steps: s.steps,
            ret: s.ret,
            e_local: s.energy.e_local,
            e_uplink: s.energy.e_uplink,
            e_relay: s.energy.e_relay,
            e_uav: s.energy.e_uav_compute,
            e_fly: s.energy.e_fly,
            e_weighted: s.energy.e_weighted_total,
            p_tm_rate: s.timeout_rate,
            p_dis_rate: s.collision_rate,
            p_ob_rate: s.out_of_bounds_rate,
            ..Default::default()
        }
    }
}

/// Everything a training run produces.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub agent: SacAgent,
    pub episodes: Vec<EpisodeLog>,
    pub evals: Vec<EvalSummary>,
    /// Policy with the highest evaluation return, and that evaluation.
    pub best: Option<(GaussianPolicy, EvalSummary)>,
    pub max_buffer_len: usize,
}

/// Runs `config.episodes` episodes, updating after each once the buffer
/// holds a full batch. The environment's own horizon ends each episode;
/// those ends are time limits, so targets keep bootstrapping through them.
pub fn train(
    env: &mut Environment,
    config: &SacConfig,
    mut on_episode: impl FnMut(&EpisodeLog, Option<&EvalSummary>),
) -> Result<TrainOutcome, LearnError> {
    config.validate()?;
    if env.config().horizon != config.episode_len {
        return Err(LearnError::Config {
            field: "episode_len",
            reason: format!("environment horizon is {}", env.config().horizon),
        });
    }
    let (sd, ad) = (env.state_dim(), env.action_dim());
    let mut agent = SacAgent::new(sd, ad, config.clone())?;
    let mut buffer = ReplayBuffer::new(config.buffer_capacity, sd, ad);
    let mut episode_rng = ChaCha8Rng::seed_from_u64(config.seed);
    episode_rng.set_stream(1);
    let eval_seed_list = eval_seeds(config.eval_episodes);
    let mut outcome = TrainOutcome {
        agent: agent.clone(),
        episodes: Vec::with_capacity(config.episodes),
        evals: Vec::new(),
        best: None,
        max_buffer_len: 0,
    };

    for episode in 1..=config.episodes {
        let seed: u64 = episode_rng.random();
        let reward_scale = config.reward_scale;
        let stats = run_episode(
            env,
            seed,
            |s| agent.act(s),
            |s, a, step| buffer.push(s, a, step.reward * reward_scale, &step.state, false),
        )?;
        outcome.max_buffer_len = outcome.max_buffer_len.max(buffer.len());

        let mut log = EpisodeLog::new(episode, &stats);
        if buffer.len() >= config.batch_size {
            let updates = config.updates_per_episode();
            let (mut lq, mut lp) = (0.0, 0.0);
            for _ in 0..updates {
                let u = agent.update(&buffer)?;
                lq += u.loss_q;
                lp += u.loss_pi;
            }
            if updates > 0 {
                log.loss_q = lq / updates as f64;
                log.loss_pi = lp / updates as f64;
            }
        }
        log.alpha = agent.alpha();

        let eval = if config.eval_episodes > 0 && episode % config.eval_every == 0 {
            let runs = evaluate_policy(env, &agent.policy, &eval_seed_list)?;
            let summary = EvalSummary::from_episodes(episode, &runs);
            if outcome.best.as_ref().is_none_or(|(_, b)| summary.mean_return > b.mean_return) {
                outcome.best = Some((agent.policy.clone(), summary));
            }
            outcome.evals.push(summary);
            Some(summary)
        } else {
            None
        };
        on_episode(&log, eval.as_ref());
        outcome.episodes.push(log);
    }
    outcome.agent = agent;
    Ok(outcome)
}

/// Trailing moving average of episode returns ending at `episode` (1-based).
pub fn moving_average_return(logs: &[EpisodeLog], episode: usize, window: usize) -> f64 {
    let end = episode.min(logs.len());
    let start = end.saturating_sub(window);
    let slice = &logs[start..end];
    slice.iter().map(|l| l.ret).sum::<f64>() / slice.len().max(1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use uavmec_core::{EnvOptions, ScenarioConfig};

    fn smoke_env() -> Environment {
        let cfg = ScenarioConfig {
            users: 3,
            uavs: 2,
            service_types: 2,
            horizon: 20,
            seed: 1,
            ..ScenarioConfig::default()
        };
        Environment::new(cfg, EnvOptions::default()).unwrap()
    }

    fn smoke_config() -> SacConfig {
        SacConfig {
            episodes: 20,
            episode_len: 20,
            batch_size: 32,
            buffer_capacity: 100,
            hidden: vec![16, 16],
            updates_per_episode: Some(10),
            eval_every: 5,
            eval_episodes: 2,
            seed: 3,
            ..Default::default()
        }
    }

    #[test]
    fn smoke_run_is_finite_and_bounded() {
        let mut env = smoke_env();
        let cfg = smoke_config();
        let out = train(&mut env, &cfg, |_, _| {}).unwrap();
        assert_eq!(out.episodes.len(), 20);
        assert!(out.max_buffer_len <= cfg.buffer_capacity);
        assert_eq!(out.evals.len(), 4);
        for l in &out.episodes {
            for x in [l.ret, l.e_weighted, l.alpha, l.loss_q, l.loss_pi] {
                assert!(x.is_finite());
            }
            assert!(l.alpha > 0.0);
        }
        assert!(out.best.is_some());
    }

    #[test]
    fn training_is_reproducible() {
        let cfg = smoke_config();
        let a = train(&mut smoke_env(), &cfg, |_, _| {}).unwrap();
        let b = train(&mut smoke_env(), &cfg, |_, _| {}).unwrap();
        assert_eq!(a.episodes, b.episodes);
        assert_eq!(a.agent.policy, b.agent.policy);
    }

    #[test]
    fn horizon_mismatch_is_rejected() {
        let cfg = SacConfig {
            episode_len: 7,
            ..smoke_config()
        };
        assert!(matches!(
            train(&mut smoke_env(), &cfg, |_, _| {}),
            Err(LearnError::Config { field: "episode_len", .. })
        ));
    }

    #[test]
    fn moving_average_window() {
        let logs: Vec<EpisodeLog> = (1..=5)
            .map(|i| EpisodeLog {
                episode: i,
                ret: i as f64,
                ..Default::default()
            })
            .collect();
        assert_eq!(moving_average_return(&logs, 5, 2), 4.5);
        assert_eq!(moving_average_return(&logs, 2, 10), 1.5);
    }
}
