use ndarray::{Array1, Array2};

use super::actor_critic::ACTION_DIM;
use super::gae::gae;
use crate::oracle::ModeKind;

/// On-policy storage, step-major: entry `(t, e)` lives at `t · n_envs + e`.
#[derive(Clone, Debug, PartialEq)]
pub struct RolloutBuffer {
    pub n_envs: usize,
    pub n_steps: usize,
    pub obs_dim: usize,
    pub obs: Vec<f64>,
    pub actions: Vec<[f64; ACTION_DIM]>,
    pub log_probs: Vec<f64>,
    pub rewards: Vec<f64>,
    pub values: Vec<f64>,
    /// Episode ended in a failure; no bootstrap.
    pub terminated: Vec<bool>,
    /// Episode cut short (time limit, success, baseline hand-off); the
    /// stored bootstrap value stands in for the rest of the episode.
    pub truncated: Vec<bool>,
    pub bootstrap: Vec<f64>,
    pub ranks: Vec<u32>,
    pub modes: Vec<ModeKind>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

/// One transition as pushed by the collector.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition<'a> {
    pub obs: &'a [f64],
    pub action: [f64; ACTION_DIM],
    pub log_prob: f64,
    pub reward: f64,
    pub value: f64,
    pub terminated: bool,
    pub truncated: bool,
    pub bootstrap: f64,
    pub rank: u32,
    pub mode: ModeKind,
}

impl RolloutBuffer {
    pub fn new(n_envs: usize, n_steps: usize, obs_dim: usize) -> Self {
        let cap = n_envs * n_steps;
        Self {
            n_envs,
            n_steps,
            obs_dim,
            obs: Vec::with_capacity(cap * obs_dim),
            actions: Vec::with_capacity(cap),
            log_probs: Vec::with_capacity(cap),
            rewards: Vec::with_capacity(cap),
            values: Vec::with_capacity(cap),
            terminated: Vec::with_capacity(cap),
            truncated: Vec::with_capacity(cap),
            bootstrap: Vec::with_capacity(cap),
            ranks: Vec::with_capacity(cap),
            modes: Vec::with_capacity(cap),
            advantages: Vec::new(),
            returns: Vec::new(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.n_envs * self.n_steps
    }

    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.capacity()
    }

    pub fn push(&mut self, tr: Transition) {
        assert_eq!(tr.obs.len(), self.obs_dim, "observation width");
        assert!(!self.is_full(), "rollout buffer overflow");
        self.obs.extend_from_slice(tr.obs);
        self.actions.push(tr.action);
        self.log_probs.push(tr.log_prob);
        self.rewards.push(tr.reward);
        self.values.push(tr.value);
        self.terminated.push(tr.terminated);
        self.truncated.push(tr.truncated);
        self.bootstrap.push(tr.bootstrap);
        self.ranks.push(tr.rank);
        self.modes.push(tr.mode);
    }

    /// Fill `advantages` and `returns` per environment. `last_values[e]`
    /// bootstraps the step after the buffer ends.
    pub fn compute_advantages(&mut self, last_values: &[f64], gamma: f64, lambda: f64) {
        assert!(self.is_full(), "advantages need a full buffer");
        assert_eq!(last_values.len(), self.n_envs);
        let n = self.capacity();
        self.advantages = vec![0.0; n];
        self.returns = vec![0.0; n];
        for (e, &last) in last_values.iter().enumerate() {
            let idx: Vec<usize> = (0..self.n_steps).map(|t| t * self.n_envs + e).collect();
            let rewards: Vec<f64> = idx
                .iter()
                .map(|&i| {
                    if self.truncated[i] {
                        self.rewards[i] + gamma * self.bootstrap[i]
                    } else {
                        self.rewards[i]
                    }
                })
                .collect();
            let values: Vec<f64> = idx.iter().map(|&i| self.values[i]).collect();
            let dones: Vec<bool> = idx
                .iter()
                .map(|&i| self.terminated[i] || self.truncated[i])
                .collect();
            let (adv, ret) = gae(&rewards, &values, last, &dones, gamma, lambda);
            for (k, &i) in idx.iter().enumerate() {
                self.advantages[i] = adv[k];
                self.returns[i] = ret[k];
            }
        }
    }

    pub fn obs_matrix(&self) -> Array2<f64> {
        Array2::from_shape_vec((self.len(), self.obs_dim), self.obs.clone()).expect("obs layout")
    }

    pub fn action_matrix(&self) -> Array2<f64> {
        Array2::from_shape_fn((self.len(), ACTION_DIM), |(i, j)| self.actions[i][j])
    }

    pub fn log_prob_vector(&self) -> Array1<f64> {
        Array1::from(self.log_probs.clone())
    }
}
