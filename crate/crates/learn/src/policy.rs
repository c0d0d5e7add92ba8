//! Tanh-squashed diagonal Gaussian policy head.
//!
//! The network emits `[μ | log σ]` per state. Actions are
//! a = tanh(μ + σ·ξ) with ξ supplied by the caller, which keeps sampling
//! reparameterised and lets tests fix the noise.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::nn::{Cache, Mlp};

pub const LOG_STD_MIN: f64 = -20.0;
pub const LOG_STD_MAX: f64 = 2.0;
/// Added inside log(1 − a²) to keep the correction finite at saturation.
pub const TANH_EPS: f64 = 1e-6;

/// Result of squashing one batch of head outputs.
#[derive(Debug, Clone)]
pub struct Squashed {
    pub batch: usize,
    pub dim: usize,
    pub actions: Vec<f64>,
    pub log_prob: Vec<f64>,
    noise: Vec<f64>,
    std: Vec<f64>,
    /// False where log σ was clamped and so carries no gradient.
    std_free: Vec<bool>,
}

/// Applies the squashed-Gaussian map to `head` (batch × 2·dim) with `noise` (batch × dim).
pub fn squash(head: &[f64], noise: &[f64], batch: usize, dim: usize) -> Squashed {
    assert_eq!(head.len(), batch * 2 * dim, "head shape");
    assert_eq!(noise.len(), batch * dim, "noise shape");
    let half_log_2pi = 0.5 * (2.0 * PI).ln();
    let mut out = Squashed {
        batch,
        dim,
        actions: Vec::with_capacity(batch * dim),
        log_prob: Vec::with_capacity(batch),
        noise: noise.to_vec(),
        std: Vec::with_capacity(batch * dim),
        std_free: Vec::with_capacity(batch * dim),
    };
    for b in 0..batch {
        let row = &head[b * 2 * dim..(b + 1) * 2 * dim];
        let mut lp = 0.0;
        for i in 0..dim {
            let raw = row[dim + i];
            let ls = raw.clamp(LOG_STD_MIN, LOG_STD_MAX);
            let sigma = ls.exp();
            let xi = noise[b * dim + i];
            let a = (row[i] + sigma * xi).tanh();
            lp += -0.5 * xi * xi - ls - half_log_2pi - (1.0 - a * a + TANH_EPS).ln();
            out.actions.push(a);
            out.std.push(sigma);
            out.std_free.push((LOG_STD_MIN..=LOG_STD_MAX).contains(&raw));
        }
        out.log_prob.push(lp);
    }
    out
}

/// Gradient w.r.t. the head given dL/da (batch × dim) and dL/dlog π (batch).
pub fn squash_backward(s: &Squashed, d_actions: &[f64], d_log_prob: &[f64]) -> Vec<f64> {
    let (batch, dim) = (s.batch, s.dim);
    let mut d_head = vec![0.0; batch * 2 * dim];
    for b in 0..batch {
        let dlp = d_log_prob[b];
        for i in 0..dim {
            let j = b * dim + i;
            let a = s.actions[j];
            let one_minus = 1.0 - a * a;
            let du = d_actions[j] * one_minus + dlp * 2.0 * a * one_minus / (one_minus + TANH_EPS);
            d_head[b * 2 * dim + i] = du;
            if s.std_free[j] {
                d_head[b * 2 * dim + dim + i] = du * s.std[j] * s.noise[j] - dlp;
            }
        }
    }
    d_head
}

pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// A policy network together with its action dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPolicy {
    pub net: Mlp,
}

/// Forward state needed to backpropagate through a sampled batch.
pub struct PolicyPass {
    pub squashed: Squashed,
    cache: Cache,
}

impl GaussianPolicy {
    pub fn new<R: Rng + ?Sized>(state_dim: usize, action_dim: usize, hidden: &[usize], rng: &mut R) -> Self {
        let mut sizes = vec![state_dim];
        sizes.extend_from_slice(hidden);
        sizes.push(2 * action_dim);
        Self {
            net: Mlp::new(&sizes, rng),
        }
    }

    pub fn action_dim(&self) -> usize {
        self.net.output_dim() / 2
    }

    pub fn state_dim(&self) -> usize {
        self.net.input_dim()
    }

    /// Reparameterised sample with caller-provided noise.
    pub fn sample_with(&self, states: &[f64], batch: usize, noise: &[f64]) -> PolicyPass {
        let (head, cache) = self.net.forward(states, batch);
        PolicyPass {
            squashed: squash(&head, noise, batch, self.action_dim()),
            cache,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, states: &[f64], batch: usize, rng: &mut R) -> PolicyPass {
        let noise = standard_normal(rng, batch * self.action_dim());
        self.sample_with(states, batch, &noise)
    }

    /// Mean action tanh(μ), used for evaluation.
    pub fn mean_action(&self, state: &[f64]) -> Vec<f64> {
        let head = self.net.predict(state, 1);
        head[..self.action_dim()].iter().map(|m| m.tanh()).collect()
    }

    /// Accumulates parameter gradients for upstream dL/da and dL/dlog π.
    pub fn backward(&self, pass: &PolicyPass, d_actions: &[f64], d_log_prob: &[f64], grad: &mut [f64]) {
        let d_head = squash_backward(&pass.squashed, d_actions, d_log_prob);
        self.net.backward(&pass.cache, &d_head, grad);
    }
}
