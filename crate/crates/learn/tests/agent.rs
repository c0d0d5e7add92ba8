//! Agent-level behaviour through the public API.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uavmec_core::{EnvOptions, Environment, ScenarioConfig};
use uavmec_learn::checkpoint;
use uavmec_learn::replay::ReplayBuffer;
use uavmec_learn::train::{eval_seeds, evaluate_policy, evaluate_random};
use uavmec_learn::{train, EvalSummary, SacAgent, SacConfig};

fn small_config() -> SacConfig {
    SacConfig {
        hidden: vec![32, 32],
        batch_size: 64,
        buffer_capacity: 2000,
        actor_lr: 3e-3,
        critic_lr: 3e-3,
        alpha_lr: 3e-3,
        initial_alpha: 0.1,
        ..SacConfig::default()
    }
}

/// One-step problem: reward −|a − target|², next state irrelevant, γ near 0.
#[test]
fn learns_a_one_step_continuous_bandit() {
    let target = [0.5, -0.3];
    let config = SacConfig {
        gamma: 0.01,
        target_entropy: Some(-4.0),
        ..small_config()
    };
    let mut agent = SacAgent::new(1, 2, config).unwrap();
    let mut buffer = ReplayBuffer::new(2000, 1, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for step in 0..1500 {
        let s = [rng.random_range(-1.0..1.0)];
        let a = agent.act(&s);
        let r = -a.iter().zip(&target).map(|(x, t)| (x - t).powi(2)).sum::<f64>();
        buffer.push(&s, &a, r, &s, false);
        if step >= 64 {
            agent.update(&buffer).unwrap();
        }
    }
    let a = agent.act_deterministic(&[0.2]);
    for (x, t) in a.iter().zip(&target) {
        assert!((x - t).abs() < 0.1, "action {a:?} vs target {target:?}");
    }
    assert!(agent.alpha() > 0.0);
}

#[test]
fn resuming_from_a_checkpoint_matches_an_uninterrupted_run() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut buffer = ReplayBuffer::new(256, 3, 2);
    for _ in 0..256 {
        let s: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let a: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
        buffer.push(&s, &a, -rng.random::<f64>(), &s, false);
    }
    let mut agent = SacAgent::new(3, 2, small_config()).unwrap();
    for _ in 0..5 {
        agent.update(&buffer).unwrap();
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mid.ckpt");
    checkpoint::save(&agent, &path).unwrap();
    let mut resumed = checkpoint::load(&path).unwrap();
    for _ in 0..5 {
        let a = agent.update(&buffer).unwrap();
        let b = resumed.update(&buffer).unwrap();
        assert_eq!(a.loss_q.to_bits(), b.loss_q.to_bits());
        assert_eq!(a.loss_pi.to_bits(), b.loss_pi.to_bits());
    }
    assert_eq!(agent.policy, resumed.policy);
    assert_eq!(agent.critics, resumed.critics);
    assert_eq!(agent.act(&[0.1, 0.2, 0.3]), resumed.act(&[0.1, 0.2, 0.3]));
}

#[test]
fn short_training_beats_random_actions_and_reloads_exactly() {
    let scenario = ScenarioConfig {
        users: 2,
        uavs: 2,
        service_types: 2,
        horizon: 40,
        ..ScenarioConfig::default()
    };
    let mut env = Environment::new(scenario, EnvOptions::default()).unwrap();
    let config = SacConfig {
        episodes: 30,
        episode_len: 40,
        hidden: vec![32, 32],
        batch_size: 64,
        eval_every: 10,
        eval_episodes: 3,
        ..SacConfig::default()
    };
    let out = train(&mut env, &config, |_, _| {}).unwrap();
    assert!(out.max_buffer_len <= config.buffer_capacity);
    assert!(out.episodes.iter().all(|e| e.ret.is_finite() && e.alpha > 0.0));
    let (policy, logged) = out.best.clone().unwrap();

    let seeds = eval_seeds(3);
    let random = EvalSummary::from_episodes(0, &evaluate_random(&mut env, &seeds, 9).unwrap());
    assert!(logged.mean_return > random.mean_return, "{} vs random {}", logged.mean_return, random.mean_return);

    let mut agent = out.agent.clone();
    agent.policy = policy;
    let back = checkpoint::from_bytes(&checkpoint::to_bytes(&agent)).unwrap();
    let again = EvalSummary::from_episodes(logged.episode, &evaluate_policy(&mut env, &back.policy, &seeds).unwrap());
    assert_eq!(again.mean_return.to_bits(), logged.mean_return.to_bits());
}
