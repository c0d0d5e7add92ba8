//! The four harness verbs: train, eval, sweep and oracle.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use uavmec_core::env::{SlotOutcome, TraceRecord};
use uavmec_core::oracle::{hover_outcome, solve_slot};
use uavmec_core::{Environment, Step};
use uavmec_learn::checkpoint;
use uavmec_learn::policy::GaussianPolicy;
use uavmec_learn::train::{run_episode, EpisodeStats};
use uavmec_learn::{train, EvalSummary, SacAgent, TrainOutcome};

use crate::artifacts::*;
use crate::config::{ExperimentConfig, Mode};
use crate::HarnessError;

/// Episode seeds of the frozen oracle slots.
pub const ORACLE_SEED_BASE: u64 = 0x04AC_1E00_0000;

/// Artifacts and in-memory results of one training run.
#[derive(Debug, Clone)]
pub struct SeedRun {
    pub mode: Mode,
    pub seed: u64,
    pub dir: PathBuf,
    pub config: ExperimentConfig,
    pub outcome: TrainOutcome,
}

impl SeedRun {
    /// Policy with the best evaluation return, or the final one if none ran.
    pub fn best_policy(&self) -> &GaussianPolicy {
        self.outcome
            .best
            .as_ref()
            .map(|(p, _)| p)
            .unwrap_or(&self.outcome.agent.policy)
    }
}

/// Flat view of an [`EvalSummary`] for CSV output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalRow {
    pub episode: usize,
    pub episodes: usize,
    pub mean_return: f64,
    pub e_local: f64,
    pub e_uplink: f64,
    pub e_relay: f64,
    pub e_uav: f64,
    pub e_fly: f64,
    pub e_weighted: f64,
    pub timeout_rate: f64,
    pub collision_rate: f64,
    pub out_of_bounds_rate: f64,
}

impl From<&EvalSummary> for EvalRow {
    fn from(s: &EvalSummary) -> Self {
        Self {
            episode: s.episode,
            episodes: s.episodes,
            mean_return: s.mean_return,
            e_local: s.energy.e_local,
            e_uplink: s.energy.e_uplink,
            e_relay: s.energy.e_relay,
            e_uav: s.energy.e_uav_compute,
            e_fly: s.energy.e_fly,
            e_weighted: s.energy.e_weighted_total,
            timeout_rate: s.timeout_rate,
            collision_rate: s.collision_rate,
            out_of_bounds_rate: s.out_of_bounds_rate,
        }
    }
}

/// Trains one agent per seed under `out/<mode>/<seed>/`.
pub fn run_train(cfg: &ExperimentConfig, mode: Mode, seeds: &[u64], out: &Path) -> Result<Vec<SeedRun>, HarnessError> {
    if !mode.is_learned() {
        return Err(HarnessError::Invalid("random mode has nothing to train; use eval".into()));
    }
    if seeds.is_empty() {
        return Err(HarnessError::Invalid("at least one seed is required".into()));
    }
    seeds
        .iter()
        .map(|&seed| train_one(cfg, mode, seed, &out.join(mode.to_string()).join(seed.to_string())))
        .collect()
}

fn train_one(cfg: &ExperimentConfig, mode: Mode, seed: u64, dir: &Path) -> Result<SeedRun, HarnessError> {
    let run_cfg = cfg.for_run(mode, seed);
    create_dir(dir)?;
    write_json(&dir.join(MANIFEST), &Manifest::new("train", mode, seed, &run_cfg))?;
    let mut env = Environment::new(run_cfg.scenario.clone(), run_cfg.env)?;
    let mut log = CsvSink::create(&dir.join(TRAIN_LOG))?;
    let mut history = CsvSink::create(&dir.join(EVAL_HISTORY))?;
    let mut sink_error = None;
    let outcome = train(&mut env, &run_cfg.sac, |row, eval| {
        if sink_error.is_some() {
            return;
        }
        let written = log
            .row(row)
            .and_then(|_| eval.map_or(Ok(()), |e| history.row(&EvalRow::from(e))));
        if let Err(e) = written {
            sink_error = Some(e);
        }
    })?;
    if let Some(e) = sink_error {
        return Err(e);
    }
    log.finish()?;
    history.finish()?;

    checkpoint::save(&outcome.agent, &dir.join(FINAL_CHECKPOINT))?;
    let mut best = outcome.agent.clone();
    if let Some((policy, _)) = &outcome.best {
        best.policy = policy.clone();
    }
    checkpoint::save(&best, &dir.join(BEST_CHECKPOINT))?;
    Ok(SeedRun {
        mode,
        seed,
        dir: dir.to_path_buf(),
        config: run_cfg,
        outcome,
    })
}

/// Loads a checkpoint and checks it fits the environment.
pub fn load_agent(path: &Path, env: &Environment) -> Result<SacAgent, HarnessError> {
    let agent = checkpoint::load(path)?;
    if agent.state_dim() != env.state_dim() || agent.action_dim() != env.action_dim() {
        return Err(HarnessError::CheckpointShape(format!(
            "{} has state/action sizes {}/{}, scenario needs {}/{}",
            path.display(),
            agent.state_dim(),
            agent.action_dim(),
            env.state_dim(),
            env.action_dim()
        )));
    }
    Ok(agent)
}

/// Who picks actions during evaluation.
pub enum Actor<'a> {
    /// Mean action of a trained policy.
    Policy(&'a GaussianPolicy),
    /// Uniform actions in [-1, 1] from one stream shared by all episodes.
    Random(ChaCha8Rng),
}

impl Actor<'_> {
    pub fn random(seed: u64) -> Self {
        Actor::Random(ChaCha8Rng::seed_from_u64(seed))
    }

    fn act(&mut self, state: &[f64], dim: usize) -> Vec<f64> {
        match self {
            Actor::Policy(p) => p.mean_action(state),
            Actor::Random(rng) => (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect(),
        }
    }
}

/// Plays one episode per seed, reporting every step with its episode index.
pub fn play(
    env: &mut Environment,
    seeds: &[u64],
    actor: &mut Actor<'_>,
    mut on_step: impl FnMut(usize, &Step),
) -> Result<Vec<EpisodeStats>, HarnessError> {
    let dim = env.action_dim();
    let mut runs = Vec::with_capacity(seeds.len());
    for (episode, &seed) in seeds.iter().enumerate() {
        let stats = run_episode(env, seed, |s| actor.act(s, dim), |_, _, step| on_step(episode, step))?;
        runs.push(stats);
    }
    Ok(runs)
}

/// Mean deterministic performance of `actor` on the configured evaluation seeds.
pub fn evaluate(cfg: &ExperimentConfig, actor: &mut Actor<'_>) -> Result<EvalSummary, HarnessError> {
    let mut env = Environment::new(cfg.scenario.clone(), cfg.env)?;
    let runs = play(&mut env, &cfg.eval.seeds(), actor, |_, _| {})?;
    Ok(EvalSummary::from_episodes(0, &runs))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub mode: Mode,
    pub checkpoint: Option<PathBuf>,
    pub seeds: Vec<u64>,
    pub mean_weighted_energy: f64,
    pub summary: EvalSummary,
    pub returns: Vec<f64>,
}

/// Deterministic evaluation episodes with a summary, a trajectory CSV and,
/// with `trace`, a per-slot JSON-lines record.
pub fn run_eval(
    cfg: &ExperimentConfig,
    mode: Mode,
    checkpoint: Option<&Path>,
    seed: u64,
    out: &Path,
    trace: bool,
) -> Result<EvalReport, HarnessError> {
    let run_cfg = cfg.for_run(mode, seed);
    let mut env = Environment::new(run_cfg.scenario.clone(), run_cfg.env)?;
    let agent = match (mode.is_learned(), checkpoint) {
        (true, Some(path)) => Some(load_agent(path, &env)?),
        (true, None) => return Err(HarnessError::Invalid(format!("{mode} evaluation needs a checkpoint"))),
        (false, _) => None,
    };
    let mut actor = match &agent {
        Some(a) => Actor::Policy(&a.policy),
        None => Actor::random(seed),
    };
    create_dir(out)?;
    write_json(&out.join(MANIFEST), &Manifest::new("eval", mode, seed, &run_cfg))?;

    let seeds = run_cfg.eval.seeds();
    let mut trajectory = CsvSink::create(&out.join(TRAJECTORY))?;
    let mut records = if trace { Some(JsonLines::create(&out.join(TRACE))?) } else { None };
    let mut sink_error = None;
    let runs = play(&mut env, &seeds, &mut actor, |episode, step| {
        if sink_error.is_some() {
            return;
        }
        let mut written = Ok(());
        for (uav, p) in step.info.positions.iter().enumerate() {
            written = written.and_then(|_| {
                trajectory.row(&TrajectoryRow {
                    episode,
                    t: step.info.slot,
                    uav,
                    x: p.x,
                    y: p.y,
                    z: p.z,
                })
            });
        }
        if let Some(r) = records.as_mut() {
            #[derive(Serialize)]
            struct Slot {
                episode: usize,
                #[serde(flatten)]
                record: TraceRecord,
            }
            written = written.and_then(|_| {
                r.record(&Slot {
                    episode,
                    record: TraceRecord::from_step(step),
                })
            });
        }
        if let Err(e) = written {
            sink_error = Some(e);
        }
    })?;
    if let Some(e) = sink_error {
        return Err(e);
    }
    trajectory.finish()?;
    if let Some(r) = records {
        r.finish()?;
    }
    let summary = EvalSummary::from_episodes(0, &runs);
    let report = EvalReport {
        mode,
        checkpoint: checkpoint.map(Path::to_path_buf),
        seeds,
        mean_weighted_energy: summary.mean_weighted_energy(),
        summary,
        returns: runs.iter().map(|r| r.ret).collect(),
    };
    write_json(&out.join(EVAL_SUMMARY), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis: String,
    pub value: String,
    pub mode: Mode,
    pub seed: u64,
    pub mean_weighted_energy: f64,
}

/// Trains and evaluates every (value, mode, seed) combination of the sweep.
/// All values are checked before the first run starts.
pub fn run_sweep(cfg: &ExperimentConfig, seeds: &[u64], out: &Path) -> Result<Vec<SweepRow>, HarnessError> {
    let sweep = cfg
        .sweep
        .clone()
        .ok_or_else(|| HarnessError::Invalid("config has no [sweep] section".into()))?;
    if seeds.is_empty() {
        return Err(HarnessError::Invalid("at least one seed is required".into()));
    }
    let variants = sweep
        .values
        .iter()
        .map(|v| {
            let label = match v {
                toml::Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            Ok((label, cfg.with_field(&sweep.axis, v.clone())?))
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    if sweep.modes.is_empty() {
        return Err(HarnessError::Invalid("sweep needs at least one mode".into()));
    }
    create_dir(out)?;
    let mut table = CsvSink::create(&out.join(SWEEP_TABLE))?;
    let mut rows = Vec::new();
    for (label, variant) in &variants {
        let dir = out.join(format!("{}={label}", sweep.axis));
        for &mode in &sweep.modes {
            for &seed in seeds {
                let summary = if mode.is_learned() {
                    let run = train_one(variant, mode, seed, &dir.join(mode.to_string()).join(seed.to_string()))?;
                    evaluate(&run.config, &mut Actor::Policy(run.best_policy()))?
                } else {
                    evaluate(&variant.for_run(mode, seed), &mut Actor::random(seed))?
                };
                let row = SweepRow {
                    axis: sweep.axis.clone(),
                    value: label.clone(),
                    mode,
                    seed,
                    mean_weighted_energy: summary.mean_weighted_energy(),
                };
                table.row(&row)?;
                rows.push(row);
            }
        }
    }
    table.finish()?;
    Ok(rows)
}

/// Weighted slot energy without propulsion, times the penalty product.
pub fn task_cost(outcome: &SlotOutcome, uav_energy_weight: f64) -> f64 {
    let e = &outcome.energy;
    let task = e.e_weighted_total - uav_energy_weight * e.e_fly;
    task * outcome.penalties.product()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleRow {
    pub slot: usize,
    pub seed: u64,
    pub oracle_cost: f64,
    pub oracle_task_cost: f64,
    pub policy_cost: Option<f64>,
    pub policy_task_cost: Option<f64>,
    /// Relative excess of the policy over the optimum.
    pub gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub slots: usize,
    pub tolerance: f64,
    pub mean_oracle_cost: f64,
    /// Share of slots whose policy gap is within the tolerance.
    pub within_tolerance: Option<f64>,
    /// Whether the optimum never exceeded the policy's cost.
    pub lower_bound_holds: Option<bool>,
    pub rows: Vec<OracleRow>,
}

/// Cost of the optimum and of `policy` on one frozen slot, both hovering.
pub fn oracle_slot(env: &mut Environment, seed: u64, policy: Option<&GaussianPolicy>) -> Result<OracleRow, HarnessError> {
    let state = env.reset(seed);
    let cfg = env.config().clone();
    let omega = cfg.uav_energy_weight;
    let solution = solve_slot(env.world(), &cfg)?;
    let mut row = OracleRow {
        slot: 0,
        seed,
        oracle_cost: solution.cost(),
        oracle_task_cost: task_cost(&solution.outcome, omega),
        policy_cost: None,
        policy_task_cost: None,
        gap: None,
    };
    if let Some(p) = policy {
        let decoded = env.decode(&p.mean_action(&state))?;
        let outcome = hover_outcome(env.world(), &cfg, &decoded);
        row.policy_cost = Some(outcome.cost());
        row.policy_task_cost = Some(task_cost(&outcome, omega));
        row.gap = Some((outcome.cost() - row.oracle_cost) / row.oracle_cost);
    }
    Ok(row)
}

/// Solves `oracle.slots` frozen slots and, given a checkpoint, scores its policy against them.
pub fn run_oracle(cfg: &ExperimentConfig, checkpoint: Option<&Path>, out: &Path) -> Result<OracleReport, HarnessError> {
    let mut env = Environment::new(cfg.scenario.clone(), cfg.env)?;
    let agent = checkpoint.map(|p| load_agent(p, &env)).transpose()?;
    create_dir(out)?;
    write_json(&out.join(MANIFEST), &Manifest::new("oracle", Mode::Sac, cfg.sac.seed, cfg))?;
    let mut rows = Vec::with_capacity(cfg.oracle.slots);
    for slot in 0..cfg.oracle.slots {
        let mut row = oracle_slot(&mut env, ORACLE_SEED_BASE + slot as u64, agent.as_ref().map(|a| &a.policy))?;
        row.slot = slot;
        rows.push(row);
    }
    let mut table = CsvSink::create(&out.join(ORACLE_TABLE))?;
    for row in &rows {
        table.row(row)?;
    }
    table.finish()?;
    let n = rows.len().max(1) as f64;
    let report = OracleReport {
        slots: rows.len(),
        tolerance: cfg.oracle.tolerance,
        mean_oracle_cost: rows.iter().map(|r| r.oracle_cost).sum::<f64>() / n,
        within_tolerance: agent.as_ref().map(|_| {
            rows.iter().filter(|r| r.gap.is_some_and(|g| g <= cfg.oracle.tolerance)).count() as f64 / n
        }),
        lower_bound_holds: agent.as_ref().map(|_| {
            rows.iter()
                .all(|r| r.policy_cost.is_some_and(|c| c >= r.oracle_cost * (1.0 - 1e-9)))
        }),
        rows,
    };
    write_json(&out.join(ORACLE_REPORT), &report)?;
    Ok(report)
}
