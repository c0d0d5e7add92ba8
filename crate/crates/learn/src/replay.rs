//! Fixed-capacity ring buffer of transitions with uniform minibatch sampling.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::LearnError;

/// A minibatch laid out row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub size: usize,
    pub states: Vec<f64>,
    pub actions: Vec<f64>,
    pub rewards: Vec<f64>,
    pub next_states: Vec<f64>,
    /// 1.0 where the next state is terminal.
    pub terminal: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayBuffer {
    capacity: usize,
    state_dim: usize,
    action_dim: usize,
    states: Vec<f64>,
    actions: Vec<f64>,
    rewards: Vec<f64>,
    next_states: Vec<f64>,
    terminal: Vec<f64>,
    len: usize,
    head: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, state_dim: usize, action_dim: usize) -> Self {
        assert!(capacity > 0, "capacity must be positive");
        Self {
            capacity,
            state_dim,
            action_dim,
            states: vec![0.0; capacity * state_dim],
            actions: vec![0.0; capacity * action_dim],
            rewards: vec![0.0; capacity],
            next_states: vec![0.0; capacity * state_dim],
            terminal: vec![0.0; capacity],
            len: 0,
            head: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Stores a transition, overwriting the oldest once full.
    pub fn push(&mut self, state: &[f64], action: &[f64], reward: f64, next_state: &[f64], terminal: bool) {
        assert_eq!(state.len(), self.state_dim, "state shape");
        assert_eq!(next_state.len(), self.state_dim, "next state shape");
        assert_eq!(action.len(), self.action_dim, "action shape");
        assert!(reward.is_finite(), "reward must be finite");
        let i = self.head;
        let (sd, ad) = (self.state_dim, self.action_dim);
        self.states[i * sd..(i + 1) * sd].copy_from_slice(state);
        self.actions[i * ad..(i + 1) * ad].copy_from_slice(action);
        self.next_states[i * sd..(i + 1) * sd].copy_from_slice(next_state);
        self.rewards[i] = reward;
        self.terminal[i] = if terminal { 1.0 } else { 0.0 };
        self.head = (self.head + 1) % self.capacity;
        self.len = (self.len + 1).min(self.capacity);
    }

    /// Indices of a minibatch: uniform over stored transitions, distinct within the batch.
    pub fn sample_indices<R: Rng + ?Sized>(&self, size: usize, rng: &mut R) -> Result<Vec<usize>, LearnError> {
        if size == 0 {
            return Err(LearnError::EmptyBatch);
        }
        if size > self.len {
            return Err(LearnError::NotEnoughData {
                have: self.len,
                need: size,
            });
        }
        Ok(index::sample(rng, self.len, size).into_vec())
    }

    pub fn sample<R: Rng + ?Sized>(&self, size: usize, rng: &mut R) -> Result<Batch, LearnError> {
        let idx = self.sample_indices(size, rng)?;
        let (sd, ad) = (self.state_dim, self.action_dim);
        let mut b = Batch {
            size,
            states: Vec::with_capacity(size * sd),
            actions: Vec::with_capacity(size * ad),
            rewards: Vec::with_capacity(size),
            next_states: Vec::with_capacity(size * sd),
            terminal: Vec::with_capacity(size),
        };
        for &i in &idx {
            b.states.extend_from_slice(&self.states[i * sd..(i + 1) * sd]);
            b.actions.extend_from_slice(&self.actions[i * ad..(i + 1) * ad]);
            b.next_states.extend_from_slice(&self.next_states[i * sd..(i + 1) * sd]);
            b.rewards.push(self.rewards[i]);
            b.terminal.push(self.terminal[i]);
        }
        Ok(b)
    }
}
