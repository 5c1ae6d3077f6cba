//! Oracle-guided multi-mode policy optimization on planar loco-manipulation
//! tasks.
//!
//! A hybrid-automaton oracle ([`oracle`]) produces receding-horizon reference
//! windows from environment feedback. A planar rigid-body world
//! ([`world`]) hosts the reach-avoid, soccer and move-box tasks. The
//! [`guidance`] layer turns world state and reference into observations,
//! reward terms (including the mode-preference penalty) and ρ-bounded
//! terminations. [`policy`] is a from-scratch PPO stack with hand-derived
//! gradients, and [`metrics`] reduces evaluation episodes to success rates
//! and mode-transition matrices.
//!
//! The `examples/` directory of this crate has one runnable program per
//! capability; the `pogmp` binary wraps the experiment pipeline.

pub mod ablation;
pub mod cli;
pub mod config;
pub mod error;
pub mod guidance;
pub mod metrics;
pub mod oracle;
pub mod policy;
pub mod world;

pub use error::{Error, Result};

/// Planar vector used for positions, velocities and directions.
pub type Vec2 = nalgebra::Vector2<f64>;

/// Unit vector along `v`, or `None` when `v` is (numerically) zero.
pub(crate) fn unit(v: Vec2) -> Option<Vec2> {
    let n = v.norm();
    (n > 1e-12).then(|| v / n)
}

/// Wrap an angle to `(-π, π]`.
pub(crate) fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::PI;
    let mut x = (a + PI).rem_euclid(2.0 * PI) - PI;
    if x <= -PI {
        x += 2.0 * PI;
    }
    x
}
