//! Soft actor-critic: twin critics with Polyak targets, a squashed-Gaussian
//! actor and an automatically tuned temperature.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adam::Adam;
use crate::nn::Mlp;
use crate::policy::{standard_normal, GaussianPolicy};
use crate::replay::{Batch, ReplayBuffer};
use crate::LearnError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SacConfig {
    /// Discount factor γ.
    pub gamma: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub alpha_lr: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    /// Polyak coefficient for target critics.
    pub tau: f64,
    /// Entropy target; `None` means −dim(action).
    pub target_entropy: Option<f64>,
    pub initial_alpha: f64,
    pub episodes: usize,
    pub episode_len: usize,
    /// Gradient updates after each episode; `None` means one per step.
    pub updates_per_episode: Option<usize>,
    pub hidden: Vec<usize>,
    /// Multiplier applied to rewards before they enter the buffer.
    pub reward_scale: f64,
    /// Evaluate every this many episodes.
    pub eval_every: usize,
    pub eval_episodes: usize,
    pub seed: u64,
}

impl Default for SacConfig {
    fn default() -> Self {
        Self {
            gamma: 0.98,
            actor_lr: 5e-4,
            critic_lr: 5e-4,
            alpha_lr: 5e-4,
            batch_size: 256,
            buffer_capacity: 20_000,
            tau: 0.005,
            target_entropy: None,
            initial_alpha: 1.0,
            episodes: 600,
            episode_len: 200,
            updates_per_episode: None,
            hidden: vec![256, 256],
            reward_scale: 0.01,
            eval_every: 10,
            eval_episodes: 5,
            seed: 0,
        }
    }
}

impl SacConfig {
    pub fn validate(&self) -> Result<(), LearnError> {
        let bad = |field: &'static str, reason: &str| {
            Err(LearnError::Config {
                field,
                reason: reason.to_string(),
            })
        };
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad("gamma", "expected 0 < gamma < 1");
        }
        for (field, lr) in [
            ("actor_lr", self.actor_lr),
            ("critic_lr", self.critic_lr),
            ("alpha_lr", self.alpha_lr),
        ] {
            if !(lr > 0.0 && lr.is_finite()) {
                return bad(field, "must be positive");
            }
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad("tau", "expected 0 < tau <= 1");
        }
        if self.batch_size == 0 {
            return bad("batch_size", "must be positive");
        }
        if self.batch_size > self.buffer_capacity {
            return bad("batch_size", "cannot exceed buffer_capacity");
        }
        if !(self.initial_alpha > 0.0 && self.initial_alpha.is_finite()) {
            return bad("initial_alpha", "must be positive");
        }
        if self.episode_len == 0 {
            return bad("episode_len", "must be positive");
        }
        if self.hidden.contains(&0) {
            return bad("hidden", "layer widths must be positive");
        }
        if !(self.reward_scale > 0.0 && self.reward_scale.is_finite()) {
            return bad("reward_scale", "must be positive");
        }
        if self.eval_every == 0 {
            return bad("eval_every", "must be positive");
        }
        Ok(())
    }

    pub fn updates_per_episode(&self) -> usize {
        self.updates_per_episode.unwrap_or(self.episode_len)
    }
}

/// θ̂ ← ε·θ + (1 − ε)·θ̂.
pub fn soft_update(target: &mut [f64], online: &[f64], tau: f64) {
    assert_eq!(target.len(), online.len(), "parameter shape");
    for (t, o) in target.iter_mut().zip(online) {
        *t = tau * o + (1.0 - tau) * *t;
    }
}

/// Row-wise concatenation [s | a].
pub fn joint_input(states: &[f64], actions: &[f64], batch: usize) -> Vec<f64> {
    let sd = states.len() / batch;
    let ad = actions.len() / batch;
    let mut x = Vec::with_capacity(batch * (sd + ad));
    for b in 0..batch {
        x.extend_from_slice(&states[b * sd..(b + 1) * sd]);
        x.extend_from_slice(&actions[b * ad..(b + 1) * ad]);
    }
    x
}

/// Online and target critics.
#[derive(Debug, Clone, PartialEq)]
pub struct Critics {
    pub q1: Mlp,
    pub q2: Mlp,
    pub target1: Mlp,
    pub target2: Mlp,
}

impl Critics {
    pub fn new(sizes: &[usize], rng: &mut ChaCha8Rng) -> Self {
        let q1 = Mlp::new(sizes, rng);
        let q2 = Mlp::new(sizes, rng);
        Self {
            target1: q1.clone(),
            target2: q2.clone(),
            q1,
            q2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CriticLoss {
    /// Sum of both critics' losses.
    pub loss: f64,
    pub grad1: Vec<f64>,
    pub grad2: Vec<f64>,
    pub targets: Vec<f64>,
}

/// Soft Bellman targets y = r + γ·(1 − done)·(min Q̂(s′, a′) − α·log π(a′|s′)),
/// with a′ drawn using `next_noise`.
pub fn soft_targets(
    batch: &Batch,
    policy: &GaussianPolicy,
    critics: &Critics,
    alpha: f64,
    gamma: f64,
    next_noise: &[f64],
) -> Vec<f64> {
    let n = batch.size;
    let next = policy.sample_with(&batch.next_states, n, next_noise).squashed;
    let x = joint_input(&batch.next_states, &next.actions, n);
    let t1 = critics.target1.predict(&x, n);
    let t2 = critics.target2.predict(&x, n);
    (0..n)
        .map(|i| batch.rewards[i] + gamma * (1.0 - batch.terminal[i]) * (t1[i].min(t2[i]) - alpha * next.log_prob[i]))
        .collect()
}

/// L_Q = ½·mean (Q_i(s, a) − y)² for each critic; targets carry no gradient.
pub fn critic_loss(
    batch: &Batch,
    policy: &GaussianPolicy,
    critics: &Critics,
    alpha: f64,
    gamma: f64,
    next_noise: &[f64],
) -> Result<CriticLoss, LearnError> {
    let n = batch.size;
    if n == 0 {
        return Err(LearnError::EmptyBatch);
    }
    let y = soft_targets(batch, policy, critics, alpha, gamma, next_noise);
    let x = joint_input(&batch.states, &batch.actions, n);
    let mut loss = 0.0;
    let mut grads = Vec::with_capacity(2);
    for q in [&critics.q1, &critics.q2] {
        let (pred, cache) = q.forward(&x, n);
        let diff: Vec<f64> = pred.iter().zip(&y).map(|(p, t)| p - t).collect();
        loss += 0.5 * diff.iter().map(|d| d * d).sum::<f64>() / n as f64;
        let dy: Vec<f64> = diff.iter().map(|d| d / n as f64).collect();
        let mut g = vec![0.0; q.num_params()];
        q.backward(&cache, &dy, &mut g);
        grads.push(g);
    }
    let grad2 = grads.pop().expect("two critics");
    let grad1 = grads.pop().expect("two critics");
    Ok(CriticLoss {
        loss,
        grad1,
        grad2,
        targets: y,
    })
}

#[derive(Debug, Clone)]
pub struct ActorLoss {
    pub loss: f64,
    pub grad: Vec<f64>,
    pub log_prob: Vec<f64>,
}

/// L_π = mean(α·log π(a|s) − min(Q1, Q2)(s, a)) with a reparameterised by `noise`.
pub fn actor_loss(
    states: &[f64],
    n: usize,
    policy: &GaussianPolicy,
    q1: &Mlp,
    q2: &Mlp,
    alpha: f64,
    noise: &[f64],
) -> Result<ActorLoss, LearnError> {
    if n == 0 {
        return Err(LearnError::EmptyBatch);
    }
    let pass = policy.sample_with(states, n, noise);
    let s = &pass.squashed;
    let ad = s.dim;
    let sd = states.len() / n;
    let x = joint_input(states, &s.actions, n);
    let (v1, c1) = q1.forward(&x, n);
    let (v2, c2) = q2.forward(&x, n);
    let mut loss = 0.0;
    // Route each sample's gradient through whichever critic is lower.
    let mut up1 = vec![0.0; n];
    let mut up2 = vec![0.0; n];
    for i in 0..n {
        let q = if v1[i] <= v2[i] {
            up1[i] = -1.0 / n as f64;
            v1[i]
        } else {
            up2[i] = -1.0 / n as f64;
            v2[i]
        };
        loss += (alpha * s.log_prob[i] - q) / n as f64;
    }
    let mut scratch1 = vec![0.0; q1.num_params()];
    let mut scratch2 = vec![0.0; q2.num_params()];
    let dx1 = q1.backward(&c1, &up1, &mut scratch1);
    let dx2 = q2.backward(&c2, &up2, &mut scratch2);
    let mut d_actions = vec![0.0; n * ad];
    for i in 0..n {
        for j in 0..ad {
            let col = i * (sd + ad) + sd + j;
            d_actions[i * ad + j] = dx1[col] + dx2[col];
        }
    }
    let d_log_prob = vec![alpha / n as f64; n];
    let mut grad = vec![0.0; policy.net.num_params()];
    policy.backward(&pass, &d_actions, &d_log_prob, &mut grad);
    Ok(ActorLoss {
        loss,
        grad,
        log_prob: s.log_prob.clone(),
    })
}

/// L(α) = mean(−α·log π − α·H*) with α = exp(log α); returns (loss, dL/dlog α).
pub fn temperature_loss(log_alpha: f64, log_prob: &[f64], target_entropy: f64) -> (f64, f64) {
    let alpha = log_alpha.exp();
    let mean = log_prob.iter().map(|lp| lp + target_entropy).sum::<f64>() / log_prob.len() as f64;
    (-alpha * mean, -alpha * mean)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct UpdateStats {
    pub loss_q: f64,
    pub loss_pi: f64,
    pub loss_alpha: f64,
    pub alpha: f64,
    /// Batch estimate of the policy entropy −E[log π].
    pub entropy: f64,
}

/// Networks, optimisers and RNG of one learner.
#[derive(Debug, Clone)]
pub struct SacAgent {
    pub config: SacConfig,
    pub policy: GaussianPolicy,
    pub critics: Critics,
    pub log_alpha: f64,
    pub actor_opt: Adam,
    pub q1_opt: Adam,
    pub q2_opt: Adam,
    pub alpha_opt: Adam,
    pub rng: ChaCha8Rng,
    pub updates: u64,
}

impl SacAgent {
    pub fn new(state_dim: usize, action_dim: usize, config: SacConfig) -> Result<Self, LearnError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let policy = GaussianPolicy::new(state_dim, action_dim, &config.hidden, &mut rng);
        let mut sizes = vec![state_dim + action_dim];
        sizes.extend_from_slice(&config.hidden);
        sizes.push(1);
        let critics = Critics::new(&sizes, &mut rng);
        Ok(Self {
            actor_opt: Adam::new(policy.net.num_params(), config.actor_lr),
            q1_opt: Adam::new(critics.q1.num_params(), config.critic_lr),
            q2_opt: Adam::new(critics.q2.num_params(), config.critic_lr),
            alpha_opt: Adam::new(1, config.alpha_lr),
            log_alpha: config.initial_alpha.ln(),
            policy,
            critics,
            config,
            rng,
            updates: 0,
        })
    }

    pub fn state_dim(&self) -> usize {
        self.policy.state_dim()
    }

    pub fn action_dim(&self) -> usize {
        self.policy.action_dim()
    }

    pub fn alpha(&self) -> f64 {
        self.log_alpha.exp()
    }

    pub fn target_entropy(&self) -> f64 {
        self.config.target_entropy.unwrap_or(-(self.action_dim() as f64))
    }

    /// Stochastic action for exploration.
    pub fn act(&mut self, state: &[f64]) -> Vec<f64> {
        self.policy.sample(state, 1, &mut self.rng).squashed.actions
    }

    /// Mean action for evaluation.
    pub fn act_deterministic(&self, state: &[f64]) -> Vec<f64> {
        self.policy.mean_action(state)
    }

    /// One gradient step on critics, actor and temperature, then Polyak targets.
    pub fn update(&mut self, buffer: &ReplayBuffer) -> Result<UpdateStats, LearnError> {
        let batch = buffer.sample(self.config.batch_size, &mut self.rng)?;
        let n = batch.size;
        let ad = self.action_dim();
        let alpha = self.alpha();

        let next_noise = standard_normal(&mut self.rng, n * ad);
        let cl = critic_loss(&batch, &self.policy, &self.critics, alpha, self.config.gamma, &next_noise)?;
        self.q1_opt.update(self.critics.q1.params_mut(), &cl.grad1);
        self.q2_opt.update(self.critics.q2.params_mut(), &cl.grad2);

        let noise = standard_normal(&mut self.rng, n * ad);
        let al = actor_loss(&batch.states, n, &self.policy, &self.critics.q1, &self.critics.q2, alpha, &noise)?;
        self.actor_opt.update(self.policy.net.params_mut(), &al.grad);

        let (loss_alpha, g_alpha) = temperature_loss(self.log_alpha, &al.log_prob, self.target_entropy());
        let mut la = [self.log_alpha];
        self.alpha_opt.update(&mut la, &[g_alpha]);
        self.log_alpha = la[0];

        let tau = self.config.tau;
        soft_update(self.critics.target1.params_mut(), self.critics.q1.params(), tau);
        soft_update(self.critics.target2.params_mut(), self.critics.q2.params(), tau);
        self.updates += 1;

        self.check_finite()?;
        let stats = UpdateStats {
            loss_q: cl.loss,
            loss_pi: al.loss,
            loss_alpha,
            alpha: self.alpha(),
            entropy: -al.log_prob.iter().sum::<f64>() / n as f64,
        };
        if [stats.loss_q, stats.loss_pi, stats.loss_alpha].iter().any(|x| !x.is_finite()) {
            return Err(LearnError::NonFinite("loss"));
        }
        Ok(stats)
    }

    fn check_finite(&self) -> Result<(), LearnError> {
        let nets = [
            ("actor", &self.policy.net),
            ("critic 1", &self.critics.q1),
            ("critic 2", &self.critics.q2),
            ("target critic 1", &self.critics.target1),
            ("target critic 2", &self.critics.target2),
        ];
        for (name, net) in nets {
            if net.params().iter().any(|p| !p.is_finite()) {
                return Err(LearnError::NonFinite(name));
            }
        }
        if !self.log_alpha.is_finite() {
            return Err(LearnError::NonFinite("temperature"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn close(analytic: f64, numeric: f64) -> bool {
        (analytic - numeric).abs() <= 1e-6_f64.max(1e-4 * analytic.abs().max(numeric.abs()))
    }

    fn random_batch(rng: &mut ChaCha8Rng, n: usize, sd: usize, ad: usize) -> Batch {
        let mut v = |len: usize, lo: f64, hi: f64| (0..len).map(|_| rng.random_range(lo..hi)).collect::<Vec<f64>>();
        Batch {
            size: n,
            states: v(n * sd, -1.0, 1.0),
            actions: v(n * ad, -1.0, 1.0),
            rewards: v(n, -2.0, 0.0),
            next_states: v(n * sd, -1.0, 1.0),
            terminal: vec![0.0; n],
        }
    }

    fn tiny(sd: usize, ad: usize, seed: u64) -> (GaussianPolicy, Critics) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let policy = GaussianPolicy::new(sd, ad, &[8, 8], &mut rng);
        let mut critics = Critics::new(&[sd + ad, 8, 8, 1], &mut rng);
        // Distinct targets so the minimum matters.
        critics.target1 = Mlp::new(&[sd + ad, 8, 8, 1], &mut rng);
        critics.target2 = Mlp::new(&[sd + ad, 8, 8, 1], &mut rng);
        (policy, critics)
    }

    #[test]
    fn zero_discount_target_is_reward() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (policy, critics) = tiny(3, 2, 1);
        let batch = random_batch(&mut rng, 5, 3, 2);
        let noise = standard_normal(&mut rng, 10);
        let cl = critic_loss(&batch, &policy, &critics, 0.0, 0.0, &noise).unwrap();
        assert_eq!(cl.targets, batch.rewards);
    }

    /// Hand evaluation: every critic is the constant 1 and α = 0, so
    /// y = 0 + 0.98·1 and each critic's loss is ½·(1 − 0.98)² = 2e-4.
    #[test]
    fn constant_critics_closed_form() {
        let sizes = [3, 4, 1];
        let mut one = Mlp::zeros(&sizes);
        *one.params_mut().last_mut().unwrap() = 1.0;
        let critics = Critics {
            q1: one.clone(),
            q2: one.clone(),
            target1: one.clone(),
            target2: one,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let policy = GaussianPolicy::new(2, 1, &[4], &mut rng);
        let batch = Batch {
            size: 1,
            states: vec![0.3, -0.2],
            actions: vec![0.5],
            rewards: vec![0.0],
            next_states: vec![0.1, 0.7],
            terminal: vec![0.0],
        };
        let cl = critic_loss(&batch, &policy, &critics, 0.0, 0.98, &[0.4]).unwrap();
        assert_relative_eq!(cl.loss, 2.0 * 2e-4, max_relative = 1e-12);
    }

    #[test]
    fn target_uses_minimum_of_target_critics() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (policy, critics) = tiny(3, 2, 3);
        let batch = random_batch(&mut rng, 6, 3, 2);
        let noise = standard_normal(&mut rng, 12);
        let y = soft_targets(&batch, &policy, &critics, 0.0, 0.9, &noise);
        let next = policy.sample_with(&batch.next_states, 6, &noise).squashed;
        let x = joint_input(&batch.next_states, &next.actions, 6);
        let (t1, t2) = (critics.target1.predict(&x, 6), critics.target2.predict(&x, 6));
        for i in 0..6 {
            assert_relative_eq!(y[i], batch.rewards[i] + 0.9 * t1[i].min(t2[i]), max_relative = 1e-14);
        }
    }

    #[test]
    fn critic_gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (policy, critics) = tiny(3, 2, 4);
        let batch = random_batch(&mut rng, 4, 3, 2);
        let noise = standard_normal(&mut rng, 8);
        let (alpha, gamma) = (0.3, 0.98);
        let cl = critic_loss(&batch, &policy, &critics, alpha, gamma, &noise).unwrap();
        let h = 1e-4;
        for which in 0..2 {
            let grad = if which == 0 { &cl.grad1 } else { &cl.grad2 };
            for i in 0..grad.len() {
                let eval = |delta: f64| {
                    let mut c = critics.clone();
                    let q = if which == 0 { &mut c.q1 } else { &mut c.q2 };
                    q.params_mut()[i] += delta;
                    critic_loss(&batch, &policy, &c, alpha, gamma, &noise).unwrap().loss
                };
                let numeric = (eval(h) - eval(-h)) / (2.0 * h);
                assert!(close(grad[i], numeric), "critic {which} param {i}: {} vs {numeric}", grad[i]);
            }
        }
    }

    #[test]
    fn actor_gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (policy, critics) = tiny(3, 2, 5);
        let states: Vec<f64> = (0..4 * 3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let noise = standard_normal(&mut rng, 8);
        let alpha = 0.2;
        let al = actor_loss(&states, 4, &policy, &critics.q1, &critics.q2, alpha, &noise).unwrap();
        let h = 1e-4;
        for i in 0..al.grad.len() {
            let eval = |delta: f64| {
                let mut p = policy.clone();
                p.net.params_mut()[i] += delta;
                actor_loss(&states, 4, &p, &critics.q1, &critics.q2, alpha, &noise).unwrap().loss
            };
            let numeric = (eval(h) - eval(-h)) / (2.0 * h);
            assert!(close(al.grad[i], numeric), "param {i}: {} vs {numeric}", al.grad[i]);
        }
    }

    #[test]
    fn temperature_gradient_matches_central_differences() {
        let lp = [1.5, -0.3, 2.2];
        let (_, g) = temperature_loss(0.4, &lp, -2.0);
        let h = 1e-4;
        let numeric = (temperature_loss(0.4 + h, &lp, -2.0).0 - temperature_loss(0.4 - h, &lp, -2.0).0) / (2.0 * h);
        assert!(close(g, numeric));
    }

    #[test]
    fn temperature_stationary_at_target_and_rises_when_entropy_low() {
        // Entropy 2 equals the target: mean log π = −2.
        let (_, g) = temperature_loss(0.0, &[-1.0, -3.0], 2.0);
        assert_eq!(g, 0.0);
        // Entropy −1 is below a target of 2, so gradient descent raises log α.
        let (_, g) = temperature_loss(0.0, &[1.0, 1.0], 2.0);
        assert!(g < 0.0);
        let mut opt = Adam::new(1, 0.1);
        let mut la = [0.0];
        opt.update(&mut la, &[g]);
        assert!(la[0] > 0.0);
    }

    #[test]
    fn default_target_entropy_is_negative_action_dim() {
        let agent = SacAgent::new(210, 255, SacConfig {
            hidden: vec![4],
            ..Default::default()
        })
        .unwrap();
        assert_eq!(agent.target_entropy(), -255.0);
    }

    #[test]
    fn soft_update_examples() {
        let mut t = vec![0.0];
        soft_update(&mut t, &[1.0], 0.005);
        assert_relative_eq!(t[0], 0.005);
        let mut t = vec![0.3, -2.0];
        soft_update(&mut t, &[1.0, 4.0], 1.0);
        assert_eq!(t, vec![1.0, 4.0]);
        let mut t = vec![0.0];
        for i in 1..=100 {
            soft_update(&mut t, &[1.0], 0.1);
            assert_relative_eq!(1.0 - t[0], 0.9f64.powi(i), max_relative = 1e-12);
        }
    }

    #[test]
    fn actor_descends_against_frozen_critics() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (mut policy, critics) = tiny(3, 2, 6);
        let states: Vec<f64> = (0..8 * 3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let noise = standard_normal(&mut rng, 16);
        let mut opt = Adam::new(policy.net.num_params(), 1e-3);
        let first = actor_loss(&states, 8, &policy, &critics.q1, &critics.q2, 0.0, &noise).unwrap().loss;
        for _ in 0..200 {
            let al = actor_loss(&states, 8, &policy, &critics.q1, &critics.q2, 0.0, &noise).unwrap();
            opt.update(policy.net.params_mut(), &al.grad);
        }
        let last = actor_loss(&states, 8, &policy, &critics.q1, &critics.q2, 0.0, &noise).unwrap().loss;
        assert!(last < first, "{last} !< {first}");
    }

    #[test]
    fn entropy_dominated_objective_widens_the_policy() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (mut policy, _) = tiny(3, 2, 7);
        let zero = Mlp::zeros(&[5, 8, 8, 1]);
        let states: Vec<f64> = (0..8 * 3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mean_log_std = |p: &GaussianPolicy| {
            let head = p.net.predict(&states, 8);
            head.chunks(4).map(|r| r[2] + r[3]).sum::<f64>() / 16.0
        };
        let before = mean_log_std(&policy);
        let mut opt = Adam::new(policy.net.num_params(), 1e-3);
        for _ in 0..200 {
            let noise = standard_normal(&mut rng, 16);
            let al = actor_loss(&states, 8, &policy, &zero, &zero, 1e3, &noise).unwrap();
            opt.update(policy.net.params_mut(), &al.grad);
        }
        assert!(mean_log_std(&policy) > before);
    }

    #[test]
    fn empty_batches_are_errors() {
        let (policy, critics) = tiny(3, 2, 8);
        let batch = Batch {
            size: 0,
            states: vec![],
            actions: vec![],
            rewards: vec![],
            next_states: vec![],
            terminal: vec![],
        };
        assert!(matches!(
            critic_loss(&batch, &policy, &critics, 0.1, 0.9, &[]),
            Err(LearnError::EmptyBatch)
        ));
        assert!(matches!(
            actor_loss(&[], 0, &policy, &critics.q1, &critics.q2, 0.1, &[]),
            Err(LearnError::EmptyBatch)
        ));
    }

    #[test]
    fn config_validation_names_fields() {
        let cfg = SacConfig {
            batch_size: 30_000,
            ..Default::default()
        };
        match cfg.validate() {
            Err(LearnError::Config { field, .. }) => assert_eq!(field, "batch_size"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
