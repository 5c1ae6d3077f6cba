//! Gaussian actor-critic policies trained with clipped-surrogate updates on
//! oracle-guided rollouts, plus the mode-specific baseline and evaluation.

pub mod actor_critic;
pub mod adam;
pub mod buffer;
pub mod checkpoint;
pub mod env;
pub mod gae;
pub mod network;
pub mod ppo;
pub mod train;

pub use actor_critic::{gaussian_entropy, gaussian_log_prob, ActorCritic, ArchitectureSpec, PolicyOutput};
pub use adam::{clip_grad_norm, Adam};
pub use buffer::RolloutBuffer;
pub use checkpoint::{Checkpoint, PolicyEntry, RngState, CHECKPOINT_VERSION};
pub use env::{EnvConfig, EpisodeEnd, EpisodeRecord, GuidedEnv, StepResult};
pub use gae::{gae, normalize_advantages};
pub use network::MlpShape;
pub use ppo::{loss_and_grad, ppo_update, LossCoefficients, LossTerms, Minibatch, PpoHyper, UpdateStats};
pub use train::{
    collect_rollouts, episode_seed, evaluate, split_budget, train, train_multi_policy_baseline,
    write_curves_csv, Collector, Evaluation, IterationStats, MultiPolicy, PolicySet, ResetMode,
    TrainConfig, TrainOutcome, CURVE_HEADER,
};
