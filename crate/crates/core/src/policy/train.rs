use std::fs;
use std::path::Path;

use log::info;
use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::actor_critic::{ActorCritic, ArchitectureSpec, ACTION_DIM};
use super::adam::Adam;
use super::buffer::{RolloutBuffer, Transition};
use super::checkpoint::{Checkpoint, PolicyEntry, RngState};
use super::env::{EnvConfig, EpisodeEnd, EpisodeRecord, GuidedEnv};
use super::ppo::{ppo_update, LossCoefficients, PpoHyper, UpdateStats};
use crate::oracle::ModeKind;
use crate::world::format_sig;
use crate::{Error, Result};

/// Optimizer and rollout settings for one training run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub n_envs: usize,
    pub n_steps: usize,
    pub total_iterations: usize,
    pub gamma: f64,
    pub lambda_gae: f64,
    pub clip: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub minibatches: usize,
    pub entropy_coef: f64,
    pub value_coef: f64,
    pub max_grad_norm: f64,
    /// Filled from the run's master seed.
    #[serde(skip)]
    pub seed: u64,
    pub preference_enabled: bool,
    pub architecture: ArchitectureSpec,
    pub frame_stack: usize,
    /// Initial-state half-width used by the mode-specific baseline policies.
    pub baseline_init_randomization: f64,
    /// Write a checkpoint every this many iterations (0: final only).
    pub checkpoint_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            n_envs: 64,
            n_steps: 64,
            total_iterations: 200,
            gamma: 0.99,
            lambda_gae: 0.95,
            clip: 0.2,
            learning_rate: 3e-4,
            epochs: 5,
            minibatches: 4,
            entropy_coef: 0.005,
            value_coef: 0.5,
            max_grad_norm: 1.0,
            seed: 0,
            preference_enabled: true,
            architecture: ArchitectureSpec::default(),
            frame_stack: 3,
            baseline_init_randomization: 0.25,
            checkpoint_every: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("train.gamma must lie in (0, 1]");
        }
        if !(self.lambda_gae > 0.0 && self.lambda_gae <= 1.0) {
            return bad("train.lambda_gae must lie in (0, 1]");
        }
        if !(self.clip > 0.0 && self.clip.is_finite()) {
            return bad("train.clip must be > 0");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("train.learning_rate must be > 0");
        }
        if self.n_envs == 0 || self.n_steps == 0 || self.epochs == 0 || self.minibatches == 0 {
            return bad("train.n_envs, n_steps, epochs and minibatches must be positive");
        }
        if self.frame_stack == 0 {
            return bad("train.frame_stack must be positive");
        }
        if !(self.max_grad_norm > 0.0) {
            return bad("train.max_grad_norm must be > 0");
        }
        if self.architecture.hidden.contains(&0) {
            return bad("train.architecture.hidden sizes must be positive");
        }
        Ok(())
    }

    pub fn ppo_hyper(&self) -> PpoHyper {
        PpoHyper {
            coefficients: LossCoefficients {
                clip: self.clip,
                value: self.value_coef,
                entropy: self.entropy_coef,
            },
            epochs: self.epochs,
            minibatches: self.minibatches,
            max_grad_norm: self.max_grad_norm,
        }
    }

    /// Environment steps consumed per iteration.
    pub fn steps_per_iteration(&self) -> usize {
        self.n_envs * self.n_steps
    }
}

/// Per-iteration learning-curve entry. Episode statistics cover episodes
/// that finished during the iteration's rollout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationStats {
    pub iteration: usize,
    pub mean_return: f64,
    pub mean_ep_len: f64,
    pub success_rate: f64,
    pub pref_violations_per_ep: f64,
    pub episodes: usize,
    pub env_steps: usize,
    /// Consecutive-mode pair counts, indexed `[from][to]` in
    /// `ModeKind::ALL` order.
    pub transitions: [[u64; 4]; 4],
    #[serde(skip)]
    pub update: UpdateStats,
}

pub const CURVE_HEADER: &str = "iteration,mean_return,mean_ep_len,success_rate,pref_violations_per_ep";

impl IterationStats {
    fn from_episodes(iteration: usize, env_steps: usize, eps: &[EpisodeRecord], update: UpdateStats) -> Self {
        let n = eps.len() as f64;
        let mean = |f: &dyn Fn(&EpisodeRecord) -> f64| {
            if eps.is_empty() {
                f64::NAN
            } else {
                eps.iter().map(f).sum::<f64>() / n
            }
        };
        let mut transitions = [[0u64; 4]; 4];
        for e in eps {
            for w in e.mode_trace.windows(2) {
                transitions[w[0] as usize][w[1] as usize] += 1;
            }
        }
        Self {
            iteration,
            mean_return: mean(&|e| e.ret),
            mean_ep_len: mean(&|e| e.steps as f64),
            success_rate: mean(&|e| if e.is_success() { 1.0 } else { 0.0 }),
            pref_violations_per_ep: mean(&|e| e.pref_violations as f64),
            episodes: eps.len(),
            env_steps,
            transitions,
            update,
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.iteration,
            format_sig(self.mean_return, 9),
            format_sig(self.mean_ep_len, 9),
            format_sig(self.success_rate, 9),
            format_sig(self.pref_violations_per_ep, 9)
        )
    }
}

pub fn write_curves_csv(path: &Path, curve: &[IterationStats]) -> Result<()> {
    let mut s = String::from(CURVE_HEADER);
    s.push('\n');
    for c in curve {
        s.push_str(&c.csv_row());
        s.push('\n');
    }
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

/// Seed of episode `episode` in environment slot `env`.
pub fn episode_seed(master: u64, env: usize, episode: u64) -> u64 {
    // SplitMix64 finalizer over a combined counter.
    let mut z = master
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((env as u64) << 32)
        .wrapping_add(episode);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// How episodes start in a collector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ResetMode {
    Nominal,
    InMode { mode: ModeKind, half_width: f64 },
}

/// Vectorized guided environments with their sampling streams.
pub struct Collector {
    envs: Vec<GuidedEnv>,
    rngs: Vec<ChaCha8Rng>,
    episodes: Vec<u64>,
    seed: u64,
    reset_mode: ResetMode,
}

impl Collector {
    pub fn new(env_cfg: &EnvConfig, n_envs: usize, seed: u64, reset_mode: ResetMode) -> Result<Self> {
        let focus = match reset_mode {
            ResetMode::Nominal => None,
            ResetMode::InMode { mode, .. } => Some(mode),
        };
        let mut envs = Vec::with_capacity(n_envs);
        let mut rngs = Vec::with_capacity(n_envs);
        for e in 0..n_envs {
            envs.push(GuidedEnv::new(env_cfg.clone(), true)?.with_focus(focus));
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(e as u64 + 1);
            rngs.push(rng);
        }
        let mut c = Self {
            envs,
            rngs,
            episodes: vec![0; n_envs],
            seed,
            reset_mode,
        };
        for e in 0..n_envs {
            c.reset_env(e)?;
        }
        Ok(c)
    }

    pub fn n_envs(&self) -> usize {
        self.envs.len()
    }

    pub fn envs(&self) -> &[GuidedEnv] {
        &self.envs
    }

    fn reset_env(&mut self, e: usize) -> Result<()> {
        let seed = episode_seed(self.seed, e, self.episodes[e]);
        self.episodes[e] += 1;
        match self.reset_mode {
            ResetMode::Nominal => self.envs[e].reset(seed),
            ResetMode::InMode { mode, half_width } => self.envs[e].reset_in_mode(mode, half_width, seed),
        }
    }

    fn obs_matrix(&self) -> Array2<f64> {
        let d = self.envs[0].observation().len();
        let mut m = Array2::zeros((self.envs.len(), d));
        for (mut row, env) in m.rows_mut().into_iter().zip(&self.envs) {
            row.assign(&ndarray::ArrayView1::from(env.observation()));
        }
        m
    }
}

/// Step every environment `n_steps` times under the stochastic policy.
pub fn collect_rollouts(
    ac: &ActorCritic,
    collector: &mut Collector,
    n_steps: usize,
) -> Result<(RolloutBuffer, Vec<EpisodeRecord>, Vec<f64>)> {
    let n_envs = collector.n_envs();
    let d = ac.obs_dim();
    let mut buffer = RolloutBuffer::new(n_envs, n_steps, d);
    let mut records = Vec::new();
    for _ in 0..n_steps {
        let obs = collector.obs_matrix();
        let fwd = ac.forward_batch(obs.view())?;
        let actions: Vec<[f64; ACTION_DIM]> = (0..n_envs)
            .map(|e| {
                let mean = std::array::from_fn(|j| fwd.mean[[e, j]]);
                ac.sample(mean, &mut collector.rngs[e])
            })
            .collect();
        let results: Vec<_> = collector
            .envs
            .par_iter_mut()
            .zip(actions.par_iter())
            .map(|(env, a)| env.step(*a))
            .collect();

        let truncated: Vec<usize> = results
            .iter()
            .enumerate()
            .filter(|(_, r)| matches!(r.end, Some((EpisodeEnd::Truncated, _))))
            .map(|(e, _)| e)
            .collect();
        let mut boot = vec![0.0; n_envs];
        if !truncated.is_empty() {
            let mut m = Array2::zeros((truncated.len(), d));
            for (k, &e) in truncated.iter().enumerate() {
                m.row_mut(k)
                    .assign(&ndarray::ArrayView1::from(collector.envs[e].observation()));
            }
            let v = ac.forward_batch(m.view())?.values;
            for (k, &e) in truncated.iter().enumerate() {
                boot[e] = v[k];
            }
        }

        for (e, r) in results.into_iter().enumerate() {
            let mean: [f64; ACTION_DIM] = std::array::from_fn(|j| fwd.mean[[e, j]]);
            let (terminated, trunc) = match &r.end {
                Some((EpisodeEnd::Terminated, _)) => (true, false),
                Some((EpisodeEnd::Truncated, _)) => (false, true),
                None => (false, false),
            };
            buffer.push(Transition {
                obs: obs.row(e).as_slice().expect("row-major obs"),
                action: actions[e],
                log_prob: ac.log_prob(&mean, &actions[e]),
                reward: r.reward,
                value: fwd.values[e],
                terminated,
                truncated: trunc,
                bootstrap: boot[e],
                rank: r.mode.rank,
                mode: r.mode.kind,
            });
            if let Some((_, rec)) = r.end {
                records.push(rec);
                collector.reset_env(e)?;
            }
        }
    }
    let last_values = ac.forward_batch(collector.obs_matrix().view())?.values.to_vec();
    Ok((buffer, records, last_values))
}

/// Result of a training run.
#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub policy: ActorCritic,
    pub curve: Vec<IterationStats>,
    /// Minibatch shuffling stream after the last update.
    pub rng: RngState,
}

fn action_scale(env_cfg: &EnvConfig) -> [f64; ACTION_DIM] {
    env_cfg.spec.body.wrench_limits()
}

fn train_loop(
    env_cfg: &EnvConfig,
    cfg: &TrainConfig,
    reset_mode: ResetMode,
    iterations: usize,
    seed: u64,
    checkpoint_dir: Option<(&Path, &str)>,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let mut init_rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ac = ActorCritic::new(
        env_cfg.policy_input_dim(),
        &cfg.architecture,
        action_scale(env_cfg),
        &mut init_rng,
    );
    let mut adam = Adam::new(ac.param_count(), cfg.learning_rate);
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(seed);
    shuffle_rng.set_stream(u64::MAX);
    let mut collector = Collector::new(env_cfg, cfg.n_envs, seed, reset_mode)?;
    let hyper = cfg.ppo_hyper();
    let mut curve = Vec::with_capacity(iterations);
    for it in 1..=iterations {
        let (mut buffer, records, last) = collect_rollouts(&ac, &mut collector, cfg.n_steps)?;
        buffer.compute_advantages(&last, cfg.gamma, cfg.lambda_gae);
        let update = ppo_update(&mut ac, &mut adam, &buffer, &hyper, &mut shuffle_rng).map_err(|e| {
            Error::UpdateAborted {
                iteration: it,
                source: Box::new(e),
            }
        })?;
        let stats = IterationStats::from_episodes(it, buffer.len(), &records, update);
        info!(
            "iter {it}: return {:.3} len {:.1} success {:.3} pref {:.3} kl {:.4}",
            stats.mean_return,
            stats.mean_ep_len,
            stats.success_rate,
            stats.pref_violations_per_ep,
            update.approx_kl
        );
        curve.push(stats);
        if let Some((dir, label)) = checkpoint_dir {
            if cfg.checkpoint_every > 0 && it % cfg.checkpoint_every == 0 && it < iterations {
                let ck = Checkpoint::new(
                    vec![PolicyEntry::new(None, &ac)],
                    it,
                    RngState::of(&shuffle_rng),
                    serde_json::Value::Null,
                );
                ck.save(&dir.join(format!("{label}_iter{it:05}.json")))?;
            }
        }
    }
    Ok(TrainOutcome {
        policy: ac,
        curve,
        rng: RngState::of(&shuffle_rng),
    })
}

/// Train one multi-mode policy with guided rollouts.
pub fn train(env_cfg: &EnvConfig, cfg: &TrainConfig, checkpoint_dir: Option<&Path>) -> Result<TrainOutcome> {
    let mut env_cfg = env_cfg.clone();
    env_cfg.preference_enabled = cfg.preference_enabled;
    env_cfg.frame_stack = cfg.frame_stack;
    train_loop(
        &env_cfg,
        cfg,
        ResetMode::Nominal,
        cfg.total_iterations,
        cfg.seed,
        checkpoint_dir.map(|d| (d, "policy")),
    )
}

/// Mode-specific policies of the finite-state-machine baseline.
#[derive(Clone, Debug)]
pub struct MultiPolicy {
    pub policies: Vec<(ModeKind, ActorCritic)>,
    pub curves: Vec<(ModeKind, Vec<IterationStats>)>,
    /// Shuffling stream of the last policy trained.
    pub rng: RngState,
}

impl MultiPolicy {
    pub fn param_count(&self) -> usize {
        self.policies.iter().map(|(_, p)| p.param_count()).sum()
    }

    pub fn policy_for(&self, mode: ModeKind) -> Option<&ActorCritic> {
        self.policies.iter().find(|(m, _)| *m == mode).map(|(_, p)| p)
    }
}

/// Iterations given to each of `n` mode policies so the total matches a
/// single-policy run of `total` iterations.
pub fn split_budget(total: usize, n: usize) -> Vec<usize> {
    (0..n).map(|k| total / n + usize::from(k < total % n)).collect()
}

/// Train one policy per oracle mode, each from mode-appropriate initial
/// states and on its own mode's reward terms, at a combined budget equal to
/// `cfg.total_iterations`.
pub fn train_multi_policy_baseline(
    env_cfg: &EnvConfig,
    cfg: &TrainConfig,
    checkpoint_dir: Option<&Path>,
) -> Result<MultiPolicy> {
    let mut env_cfg = env_cfg.clone();
    env_cfg.preference_enabled = false;
    env_cfg.frame_stack = cfg.frame_stack;
    let modes = env_cfg.oracle.build(&env_cfg.spec)?.mode_kinds();
    let budgets = split_budget(cfg.total_iterations, modes.len());
    let mut policies = Vec::new();
    let mut curves = Vec::new();
    let mut rng = RngState::of(&ChaCha8Rng::seed_from_u64(cfg.seed));
    for (k, (&mode, &iters)) in modes.iter().zip(&budgets).enumerate() {
        let reset = ResetMode::InMode {
            mode,
            half_width: cfg.baseline_init_randomization,
        };
        let seed = episode_seed(cfg.seed, 1 << 20, k as u64);
        let out = train_loop(
            &env_cfg,
            cfg,
            reset,
            iters,
            seed,
            checkpoint_dir.map(|d| (d, mode.name())),
        )?;
        policies.push((mode, out.policy));
        curves.push((mode, out.curve));
        rng = out.rng;
    }
    Ok(MultiPolicy {
        policies,
        curves,
        rng,
    })
}

/// Single policy or oracle-dispatched set of mode policies.
#[derive(Clone, Copy, Debug)]
pub enum PolicySet<'a> {
    Single(&'a ActorCritic),
    Fsm(&'a MultiPolicy),
}

impl<'a> PolicySet<'a> {
    /// The policy acting when the oracle is in `mode`.
    pub fn select(&self, mode: ModeKind) -> Result<&'a ActorCritic> {
        match self {
            PolicySet::Single(p) => Ok(p),
            PolicySet::Fsm(m) => m
                .policy_for(mode)
                .ok_or_else(|| Error::InvalidArgument(format!("no policy for mode {mode}"))),
        }
    }
}

/// Evaluation output: one record per episode, plus trajectories when
/// requested.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub records: Vec<EpisodeRecord>,
    pub trajectories: Vec<Vec<crate::world::TrajectoryRow>>,
}

/// Run `n_episodes` deterministic episodes (distribution mean actions,
/// reference terminations off); episode `i` resets with seed `seed + i`.
pub fn evaluate(
    policies: PolicySet,
    env_cfg: &EnvConfig,
    n_episodes: usize,
    seed: u64,
    record_trajectories: bool,
) -> Result<Evaluation> {
    let runs: Vec<Result<(EpisodeRecord, Vec<crate::world::TrajectoryRow>)>> = (0..n_episodes)
        .into_par_iter()
        .map(|i| {
            let mut env = GuidedEnv::new(env_cfg.clone(), false)?;
            env.reset(seed.wrapping_add(i as u64))?;
            let mut rows = Vec::new();
            if record_trajectories {
                rows.push(env.trajectory_row([0.0; 3], false));
            }
            loop {
                let policy = policies.select(env.current_mode().kind)?;
                let out = policy.policy_forward(env.observation())?;
                let r = env.step(out.mean);
                if record_trajectories {
                    rows.push(env.trajectory_row(r.wrench, r.contact));
                }
                if let Some((_, rec)) = r.end {
                    return Ok((rec, rows));
                }
            }
        })
        .collect();
    let mut records = Vec::with_capacity(n_episodes);
    let mut trajectories = Vec::new();
    for r in runs {
        let (rec, rows) = r?;
        records.push(rec);
        if record_trajectories {
            trajectories.push(rows);
        }
    }
    Ok(Evaluation {
        records,
        trajectories,
    })
}
