use std::f64::consts::{E, PI};

use ndarray::{Array1, Array2, ArrayView2};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::network::{MlpCache, MlpShape};
use crate::{Error, Result};

pub const LOG_STD_MIN: f64 = -5.0;
pub const LOG_STD_MAX: f64 = 2.0;
pub const ACTION_DIM: usize = 3;

/// Network layout shared by every policy in a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchitectureSpec {
    pub hidden: Vec<usize>,
    /// Initial state-independent log-std, in normalized action units.
    pub init_log_std: f64,
}

impl Default for ArchitectureSpec {
    fn default() -> Self {
        Self {
            hidden: vec![200, 100],
            init_log_std: -0.5,
        }
    }
}

/// Diagonal Gaussian policy with a tanh-squashed mean and a separate value
/// network. The flat parameter vector is laid out as
/// `[actor | log_std (3) | critic]`.
///
/// The action distribution lives in wrench units: mean `L ⊙ tanh(z)` and
/// standard deviation `L ⊙ exp(s)`, with `L` the wrench limits and `s` the
/// learned log-std parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActorCritic {
    pub actor: MlpShape,
    pub critic: MlpShape,
    pub action_scale: [f64; ACTION_DIM],
    pub params: Vec<f64>,
}

/// Output of a single-observation forward pass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolicyOutput {
    pub mean: [f64; ACTION_DIM],
    /// Log-std in wrench units.
    pub log_std: [f64; ACTION_DIM],
    pub value: f64,
}

/// Batched forward pass with the caches needed for backpropagation.
pub struct BatchForward {
    pub actor: MlpCache,
    pub critic: MlpCache,
    /// Pre-squash actor outputs after tanh, `tanh(z)`.
    pub squashed: Array2<f64>,
    pub mean: Array2<f64>,
    pub values: Array1<f64>,
}

impl ActorCritic {
    pub fn new(
        obs_dim: usize,
        arch: &ArchitectureSpec,
        action_scale: [f64; ACTION_DIM],
        rng: &mut impl Rng,
    ) -> Self {
        let actor = MlpShape::new(obs_dim, &arch.hidden, ACTION_DIM);
        let critic = MlpShape::new(obs_dim, &arch.hidden, 1);
        let mut params = actor.init(rng, 1.0, 0.01);
        params.extend(std::iter::repeat_n(
            arch.init_log_std.clamp(LOG_STD_MIN, LOG_STD_MAX),
            ACTION_DIM,
        ));
        params.extend(critic.init(rng, 1.0, 1.0));
        Self {
            actor,
            critic,
            action_scale,
            params,
        }
    }

    /// All weights, biases and the log-std vector set to zero.
    pub fn zeros(obs_dim: usize, arch: &ArchitectureSpec, action_scale: [f64; ACTION_DIM]) -> Self {
        let actor = MlpShape::new(obs_dim, &arch.hidden, ACTION_DIM);
        let critic = MlpShape::new(obs_dim, &arch.hidden, 1);
        let n = actor.param_count() + ACTION_DIM + critic.param_count();
        Self {
            actor,
            critic,
            action_scale,
            params: vec![0.0; n],
        }
    }

    pub fn obs_dim(&self) -> usize {
        self.actor.input()
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub(crate) fn log_std_offset(&self) -> usize {
        self.actor.param_count()
    }

    pub(crate) fn critic_offset(&self) -> usize {
        self.actor.param_count() + ACTION_DIM
    }

    pub fn actor_params(&self) -> &[f64] {
        &self.params[..self.log_std_offset()]
    }

    pub fn critic_params(&self) -> &[f64] {
        &self.params[self.critic_offset()..]
    }

    /// Raw log-std parameters (normalized action units).
    pub fn log_std_params(&self) -> [f64; ACTION_DIM] {
        let o = self.log_std_offset();
        [self.params[o], self.params[o + 1], self.params[o + 2]]
    }

    /// Log-std in wrench units.
    pub fn log_std(&self) -> [f64; ACTION_DIM] {
        let s = self.log_std_params();
        std::array::from_fn(|i| s[i] + self.action_scale[i].ln())
    }

    pub fn clamp_log_std(&mut self) {
        let o = self.log_std_offset();
        for v in &mut self.params[o..o + ACTION_DIM] {
            *v = v.clamp(LOG_STD_MIN, LOG_STD_MAX);
        }
    }

    pub fn validate(&self) -> Result<()> {
        let expected = self.actor.param_count() + ACTION_DIM + self.critic.param_count();
        if self.params.len() != expected {
            return Err(Error::Shape {
                expected,
                got: self.params.len(),
            });
        }
        if self.actor.output() != ACTION_DIM
            || self.critic.output() != 1
            || self.actor.input() != self.critic.input()
        {
            return Err(Error::InvalidArgument("inconsistent actor/critic shapes".into()));
        }
        if self.params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument("non-finite network parameter".into()));
        }
        Ok(())
    }

    pub fn forward_batch(&self, obs: ArrayView2<f64>) -> Result<BatchForward> {
        let actor = self.actor.forward(self.actor_params(), obs)?;
        let critic = self.critic.forward(self.critic_params(), obs)?;
        let squashed = actor.output().mapv(f64::tanh);
        let mut mean = squashed.clone();
        for mut row in mean.rows_mut() {
            for (m, l) in row.iter_mut().zip(self.action_scale) {
                *m *= l;
            }
        }
        let values = critic.output().column(0).to_owned();
        Ok(BatchForward {
            actor,
            critic,
            squashed,
            mean,
            values,
        })
    }

    /// Deterministic single-observation forward pass.
    pub fn policy_forward(&self, obs: &[f64]) -> Result<PolicyOutput> {
        let x = ArrayView2::from_shape((1, obs.len()), obs).expect("row vector");
        let f = self.forward_batch(x)?;
        Ok(PolicyOutput {
            mean: std::array::from_fn(|i| f.mean[[0, i]]),
            log_std: self.log_std(),
            value: f.values[0],
        })
    }

    /// Sample `mean + σ ⊙ ε` with `ε ~ N(0, I)`.
    pub fn sample(&self, mean: [f64; ACTION_DIM], rng: &mut impl Rng) -> [f64; ACTION_DIM] {
        let ls = self.log_std();
        std::array::from_fn(|i| {
            let e: f64 = rng.sample(StandardNormal);
            mean[i] + ls[i].exp() * e
        })
    }

    pub fn log_prob(&self, mean: &[f64], action: &[f64]) -> f64 {
        gaussian_log_prob(mean, &self.log_std(), action)
    }

    pub fn entropy(&self) -> f64 {
        gaussian_entropy(&self.log_std())
    }
}

/// Σ_i [−½((a_i − μ_i)/σ_i)² − log σ_i − ½ log 2π].
pub fn gaussian_log_prob(mean: &[f64], log_std: &[f64], action: &[f64]) -> f64 {
    mean.iter()
        .zip(log_std)
        .zip(action)
        .map(|((m, s), a)| {
            let z = (a - m) / s.exp();
            -0.5 * z * z - s - 0.5 * (2.0 * PI).ln()
        })
        .sum()
}

/// Σ log σ_i + k/2 · log(2πe).
pub fn gaussian_entropy(log_std: &[f64]) -> f64 {
    log_std.iter().sum::<f64>() + 0.5 * log_std.len() as f64 * (2.0 * PI * E).ln()
}
