//! Couples oracle references to the world: observations, reward terms, the
//! mode-preference penalty and ρ-bounded terminations.

mod observation;
mod preference;
mod reward;
mod termination;

pub use observation::{observe, Observation, OBS_DIM};
pub use preference::{preference_reward, RankTrace};
pub use reward::{
    object_rewards, regularization_rewards, total_reward, tracking_rewards,
    write_reward_breakdown, ExpTerm, ModeGates, NormalizingConstants, RewardConfig, RewardTerms,
    Term,
};
pub use termination::{check_termination, BoundCoordinate, DeviationBounds, Termination};
