use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;

use super::actor_critic::{ActorCritic, ACTION_DIM};
use super::adam::{clip_grad_norm, Adam};
use super::buffer::RolloutBuffer;
use super::gae::normalize_advantages;
use crate::{Error, Result};

/// Loss weighting for one evaluation of the clipped objective.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossCoefficients {
    pub clip: f64,
    pub value: f64,
    pub entropy: f64,
}

/// Hyperparameters consumed by [`ppo_update`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PpoHyper {
    pub coefficients: LossCoefficients,
    pub epochs: usize,
    pub minibatches: usize,
    pub max_grad_norm: f64,
}

/// A batch of samples with precomputed (already normalized) advantages.
#[derive(Clone, Debug)]
pub struct Minibatch {
    pub obs: Array2<f64>,
    pub actions: Array2<f64>,
    pub old_log_probs: Array1<f64>,
    pub advantages: Array1<f64>,
    pub returns: Array1<f64>,
}

impl Minibatch {
    pub fn len(&self) -> usize {
        self.obs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.obs.nrows() == 0
    }

    fn select(&self, idx: &[usize]) -> Minibatch {
        Minibatch {
            obs: self.obs.select(Axis(0), idx),
            actions: self.actions.select(Axis(0), idx),
            old_log_probs: self.old_log_probs.select(Axis(0), idx),
            advantages: self.advantages.select(Axis(0), idx),
            returns: self.returns.select(Axis(0), idx),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LossTerms {
    /// −E[min(ρA, clip(ρ)A)].
    pub policy_loss: f64,
    /// E[(V − R)²].
    pub value_loss: f64,
    pub entropy: f64,
    pub clip_fraction: f64,
    /// E[(ρ − 1) − log ρ].
    pub approx_kl: f64,
    /// policy_loss + c_v·value_loss − c_e·entropy.
    pub total: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct UpdateStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub clip_fraction: f64,
    pub approx_kl: f64,
    pub grad_norm: f64,
}

/// Loss and its exact gradient with respect to `ac.params`.
pub fn loss_and_grad(
    ac: &ActorCritic,
    mb: &Minibatch,
    coef: LossCoefficients,
) -> Result<(LossTerms, Vec<f64>)> {
    let n = mb.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty minibatch".into()));
    }
    if mb.actions.ncols() != ACTION_DIM {
        return Err(Error::Shape {
            expected: ACTION_DIM,
            got: mb.actions.ncols(),
        });
    }
    let nf = n as f64;
    let fwd = ac.forward_batch(mb.obs.view())?;
    let log_std = ac.log_std();
    let sigma: [f64; ACTION_DIM] = std::array::from_fn(|j| log_std[j].exp());
    let half_log_2pi = 0.5 * (2.0 * std::f64::consts::PI).ln();

    let mut d_z = Array2::<f64>::zeros((n, ACTION_DIM));
    let mut d_s = [0.0; ACTION_DIM];
    let mut d_v = Array2::<f64>::zeros((n, 1));
    let mut terms = LossTerms::default();

    for i in 0..n {
        let mut logp = 0.0;
        let mut zs = [0.0; ACTION_DIM];
        for j in 0..ACTION_DIM {
            zs[j] = (mb.actions[[i, j]] - fwd.mean[[i, j]]) / sigma[j];
            logp += -0.5 * zs[j] * zs[j] - log_std[j] - half_log_2pi;
        }
        let log_ratio = logp - mb.old_log_probs[i];
        let ratio = log_ratio.exp();
        let a = mb.advantages[i];
        let clipped = ratio.clamp(1.0 - coef.clip, 1.0 + coef.clip);
        let (s1, s2) = (ratio * a, clipped * a);
        terms.policy_loss -= s1.min(s2) / nf;
        terms.approx_kl += (ratio - 1.0 - log_ratio) / nf;
        if (ratio - 1.0).abs() > coef.clip {
            terms.clip_fraction += 1.0 / nf;
        }
        // ∂L_pi/∂logp is nonzero only where the unclipped branch is active.
        let d_logp = if s1 <= s2 { -ratio * a / nf } else { 0.0 };
        for j in 0..ACTION_DIM {
            let u = fwd.squashed[[i, j]];
            let d_mean = d_logp * zs[j] / sigma[j];
            d_z[[i, j]] = d_mean * ac.action_scale[j] * (1.0 - u * u);
            d_s[j] += d_logp * (zs[j] * zs[j] - 1.0);
        }
        let err = fwd.values[i] - mb.returns[i];
        terms.value_loss += err * err / nf;
        d_v[[i, 0]] = coef.value * 2.0 * err / nf;
    }
    terms.entropy = super::actor_critic::gaussian_entropy(&log_std);
    for d in &mut d_s {
        *d -= coef.entropy;
    }
    terms.total = terms.policy_loss + coef.value * terms.value_loss - coef.entropy * terms.entropy;

    let mut grad = vec![0.0; ac.param_count()];
    let (a_off, s_off, c_off) = (0, ac.log_std_offset(), ac.critic_offset());
    ac.actor
        .backward(ac.actor_params(), &fwd.actor, &d_z, &mut grad[a_off..s_off]);
    grad[s_off..c_off].copy_from_slice(&d_s);
    ac.critic
        .backward(ac.critic_params(), &fwd.critic, &d_v, &mut grad[c_off..]);
    Ok((terms, grad))
}

/// Build the full batch from a buffer whose advantages were computed,
/// normalizing advantages over the whole batch.
pub fn batch_from_buffer(buffer: &RolloutBuffer) -> Result<Minibatch> {
    if !buffer.is_full() || buffer.advantages.len() != buffer.len() {
        return Err(Error::InvalidArgument(
            "ppo update needs a full buffer with advantages".into(),
        ));
    }
    let mut adv = buffer.advantages.clone();
    normalize_advantages(&mut adv);
    Ok(Minibatch {
        obs: buffer.obs_matrix(),
        actions: buffer.action_matrix(),
        old_log_probs: buffer.log_prob_vector(),
        advantages: Array1::from(adv),
        returns: Array1::from(buffer.returns.clone()),
    })
}

/// Clipped-surrogate update over `epochs × minibatches` gradient steps.
/// On a non-finite loss the parameters are restored and the offending
/// minibatch is reported.
pub fn ppo_update(
    ac: &mut ActorCritic,
    adam: &mut Adam,
    buffer: &RolloutBuffer,
    hyper: &PpoHyper,
    rng: &mut impl Rng,
) -> Result<UpdateStats> {
    let batch = batch_from_buffer(buffer)?;
    let n = batch.len();
    let mb_count = hyper.minibatches.clamp(1, n);
    let snapshot = (ac.params.clone(), adam.clone());
    let mut stats = UpdateStats::default();
    let mut count = 0.0;
    let mut order: Vec<usize> = (0..n).collect();
    for epoch in 0..hyper.epochs {
        order.shuffle(rng);
        for (k, chunk) in order.chunks(n.div_ceil(mb_count)).enumerate() {
            let mb = batch.select(chunk);
            let (terms, mut grad) = loss_and_grad(ac, &mb, hyper.coefficients)?;
            if !terms.total.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                ac.params = snapshot.0;
                *adam = snapshot.1;
                return Err(Error::NonFiniteLoss {
                    epoch,
                    minibatch: k,
                });
            }
            let norm = clip_grad_norm(&mut grad, hyper.max_grad_norm);
            adam.step(&mut ac.params, &grad);
            ac.clamp_log_std();
            stats.policy_loss += terms.policy_loss;
            stats.value_loss += terms.value_loss;
            stats.entropy += terms.entropy;
            stats.clip_fraction += terms.clip_fraction;
            stats.approx_kl += terms.approx_kl;
            stats.grad_norm += norm;
            count += 1.0;
        }
    }
    if count > 0.0 {
        stats.policy_loss /= count;
        stats.value_loss /= count;
        stats.entropy /= count;
        stats.clip_fraction /= count;
        stats.approx_kl /= count;
        stats.grad_norm /= count;
    }
    Ok(stats)
}
