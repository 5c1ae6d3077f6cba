use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::oracle::ReferenceState;
use crate::world::{format_sig, ObjectKind, PlanarWorldState, RobotBody};
use crate::{Error, Result};

/// Reward terms, in breakdown order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    BasePos,
    BaseOri,
    BaseLinVel,
    BaseAngVel,
    ModePreference,
    ObjectProximity,
    ObjectPos,
    ObjectLinVel,
    BallRestPenalty,
    EffortMag,
    EffortRate,
    BodyVelReg,
}

impl Term {
    pub const COUNT: usize = 12;
    pub const ALL: [Term; Term::COUNT] = [
        Term::BasePos,
        Term::BaseOri,
        Term::BaseLinVel,
        Term::BaseAngVel,
        Term::ModePreference,
        Term::ObjectProximity,
        Term::ObjectPos,
        Term::ObjectLinVel,
        Term::BallRestPenalty,
        Term::EffortMag,
        Term::EffortRate,
        Term::BodyVelReg,
    ];

    pub const fn name(self) -> &'static str {
        match self {
            Term::BasePos => "base_pos",
            Term::BaseOri => "base_ori",
            Term::BaseLinVel => "base_lin_vel",
            Term::BaseAngVel => "base_ang_vel",
            Term::ModePreference => "mode_preference",
            Term::ObjectProximity => "object_proximity",
            Term::ObjectPos => "object_pos",
            Term::ObjectLinVel => "object_lin_vel",
            Term::BallRestPenalty => "ball_rest_penalty",
            Term::EffortMag => "effort_mag",
            Term::EffortRate => "effort_rate",
            Term::BodyVelReg => "body_vel_reg",
        }
    }
}

/// Weighted exponential kernel `weight · exp(−scale · x)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpTerm {
    pub weight: f64,
    pub scale: f64,
}

impl ExpTerm {
    const fn new(weight: f64, scale: f64) -> Self {
        Self { weight, scale }
    }

    fn eval(&self, x: f64) -> f64 {
        (-self.scale * x).exp()
    }
}

/// Each norm in the reward table is divided by its normalizing constant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalizingConstants {
    pub position: f64,
    pub velocity: f64,
    pub angular_velocity: f64,
    /// Per-component wrench scale (force x, force y, torque).
    pub wrench: [f64; 3],
    pub body_velocity: f64,
}

/// Mode ranks on which the object terms are active.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeGates {
    pub object_proximity: u32,
    pub object_pos: u32,
    pub object_lin_vel: u32,
    pub ball_rest: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardConfig {
    pub base_pos: ExpTerm,
    pub base_ori: ExpTerm,
    pub base_lin_vel: ExpTerm,
    pub base_ang_vel: ExpTerm,
    pub mode_preference: f64,
    pub object_proximity: f64,
    pub object_pos: ExpTerm,
    pub object_lin_vel: ExpTerm,
    pub ball_rest_penalty: f64,
    pub rest_threshold: f64,
    pub effort_mag: ExpTerm,
    pub effort_rate: ExpTerm,
    pub body_vel_reg: ExpTerm,
    /// Robot–object distance within which the proximity term fires.
    pub h_robot: f64,
    pub normalizing: NormalizingConstants,
    pub gates: ModeGates,
    pub regularization_enabled: bool,
}

impl RewardConfig {
    /// Reward-table weights and scales, with regularization off.
    pub fn paper_defaults() -> Self {
        Self {
            base_pos: ExpTerm::new(0.3, 5.0),
            base_ori: ExpTerm::new(0.3, 5.0),
            base_lin_vel: ExpTerm::new(0.15, 2.0),
            base_ang_vel: ExpTerm::new(0.15, 2.0),
            mode_preference: -5.0,
            object_proximity: 0.5,
            object_pos: ExpTerm::new(1.0, 2.0),
            object_lin_vel: ExpTerm::new(1.0, 2.0),
            ball_rest_penalty: -0.5,
            rest_threshold: 0.05,
            effort_mag: ExpTerm::new(0.1, 10.0),
            effort_rate: ExpTerm::new(0.1, 10.0),
            body_vel_reg: ExpTerm::new(0.1, 10.0),
            h_robot: 0.5,
            normalizing: NormalizingConstants {
                position: 1.0,
                velocity: 1.0,
                angular_velocity: 1.0,
                wrench: [40.0, 40.0, 10.0],
                body_velocity: 1.0,
            },
            gates: ModeGates {
                object_proximity: 1,
                object_pos: 2,
                object_lin_vel: 2,
                ball_rest: 1,
            },
            regularization_enabled: false,
        }
    }

    pub fn weight(&self, term: Term) -> f64 {
        match term {
            Term::BasePos => self.base_pos.weight,
            Term::BaseOri => self.base_ori.weight,
            Term::BaseLinVel => self.base_lin_vel.weight,
            Term::BaseAngVel => self.base_ang_vel.weight,
            Term::ModePreference => self.mode_preference,
            Term::ObjectProximity => self.object_proximity,
            Term::ObjectPos => self.object_pos.weight,
            Term::ObjectLinVel => self.object_lin_vel.weight,
            Term::BallRestPenalty => self.ball_rest_penalty,
            Term::EffortMag => self.effort_mag.weight,
            Term::EffortRate => self.effort_rate.weight,
            Term::BodyVelReg => self.body_vel_reg.weight,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let scales = [
            self.base_pos.scale,
            self.base_ori.scale,
            self.base_lin_vel.scale,
            self.base_ang_vel.scale,
            self.object_pos.scale,
            self.object_lin_vel.scale,
            self.effort_mag.scale,
            self.effort_rate.scale,
            self.body_vel_reg.scale,
        ];
        let n = &self.normalizing;
        let norms = [n.position, n.velocity, n.angular_velocity, n.body_velocity];
        if scales
            .iter()
            .chain(&norms)
            .chain(&n.wrench)
            .any(|s| !(*s > 0.0 && s.is_finite()))
        {
            return Err(Error::Config("reward scales and normalizers must be positive".into()));
        }
        if Term::ALL.iter().any(|t| !self.weight(*t).is_finite()) {
            return Err(Error::Config("reward weights must be finite".into()));
        }
        Ok(())
    }
}

/// Unweighted term values plus which terms were active this step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RewardTerms {
    pub values: [f64; Term::COUNT],
    pub active: [bool; Term::COUNT],
}

impl RewardTerms {
    pub fn get(&self, term: Term) -> f64 {
        self.values[term as usize]
    }

    pub fn set(&mut self, term: Term, value: f64) {
        self.values[term as usize] = value;
        self.active[term as usize] = true;
    }

    /// Combine with terms computed by another function.
    pub fn merge(mut self, other: &RewardTerms) -> Self {
        for i in 0..Term::COUNT {
            if other.active[i] {
                self.values[i] = other.values[i];
                self.active[i] = true;
            }
        }
        self
    }

    pub fn weighted(&self, cfg: &RewardConfig) -> [f64; Term::COUNT] {
        let mut out = [0.0; Term::COUNT];
        for t in Term::ALL {
            out[t as usize] = cfg.weight(t) * self.get(t);
        }
        out
    }
}

/// Base tracking terms against the aligned reference sample.
pub fn tracking_rewards(
    world: &PlanarWorldState,
    reference: &ReferenceState,
    cfg: &RewardConfig,
) -> RewardTerms {
    let r = &world.robot;
    let n = &cfg.normalizing;
    let cos = r.heading_vec().dot(&reference.heading);
    let mut out = RewardTerms::default();
    out.set(
        Term::BasePos,
        cfg.base_pos.eval((r.p - reference.p_robot).norm() / n.position),
    );
    out.set(Term::BaseOri, cfg.base_ori.eval(1.0 - cos * cos));
    out.set(
        Term::BaseLinVel,
        cfg.base_lin_vel.eval((r.v - reference.v_robot).norm() / n.velocity),
    );
    out.set(
        Term::BaseAngVel,
        cfg.base_ang_vel
            .eval((r.omega - reference.omega_robot).abs() / n.angular_velocity),
    );
    out
}

/// Object terms, each gated on the active mode rank. Worlds without an
/// object produce no active terms.
pub fn object_rewards(
    world: &PlanarWorldState,
    reference: &ReferenceState,
    cfg: &RewardConfig,
    active_rank: u32,
) -> RewardTerms {
    let mut out = RewardTerms::default();
    let Some(o) = &world.object else {
        return out;
    };
    let n = &cfg.normalizing;
    let g = &cfg.gates;
    let indicator = |b: bool| if b { 1.0 } else { 0.0 };
    if active_rank == g.object_proximity {
        let near = (o.p - world.robot.p).norm() / n.position <= cfg.h_robot;
        out.set(Term::ObjectProximity, indicator(near));
    }
    if active_rank == g.object_pos {
        out.set(
            Term::ObjectPos,
            cfg.object_pos.eval((o.p - reference.p_object).norm() / n.position),
        );
    }
    if active_rank == g.object_lin_vel {
        out.set(
            Term::ObjectLinVel,
            cfg.object_lin_vel
                .eval((o.v - reference.v_object).norm() / n.velocity),
        );
    }
    if active_rank == g.ball_rest && o.kind == ObjectKind::Ball {
        out.set(
            Term::BallRestPenalty,
            indicator(o.v.norm() / n.velocity <= cfg.rest_threshold),
        );
    }
    out
}

/// Effort magnitude, effort rate and body-velocity regularizers. Inactive
/// (all zero) when regularization is disabled.
pub fn regularization_rewards(
    robot: &RobotBody,
    wrench: [f64; 3],
    previous_wrench: [f64; 3],
    cfg: &RewardConfig,
) -> RewardTerms {
    let mut out = RewardTerms::default();
    if !cfg.regularization_enabled {
        return out;
    }
    let c = cfg.normalizing.wrench;
    let norm3 = |u: [f64; 3]| {
        ((u[0] / c[0]).powi(2) + (u[1] / c[1]).powi(2) + (u[2] / c[2]).powi(2)).sqrt()
    };
    let rate = [
        wrench[0] - previous_wrench[0],
        wrench[1] - previous_wrench[1],
        wrench[2] - previous_wrench[2],
    ];
    let body_speed = (robot.v.norm_squared() + robot.omega * robot.omega).sqrt();
    out.set(Term::EffortMag, cfg.effort_mag.eval(norm3(wrench)));
    out.set(Term::EffortRate, cfg.effort_rate.eval(norm3(rate)));
    out.set(
        Term::BodyVelReg,
        cfg.body_vel_reg.eval(body_speed / cfg.normalizing.body_velocity),
    );
    out
}

/// Σ weight · term.
pub fn total_reward(terms: &RewardTerms, cfg: &RewardConfig) -> f64 {
    terms.weighted(cfg).iter().sum()
}

/// Append-free writer for the `step,term,value,weighted` breakdown; one row
/// per active term.
pub fn write_reward_breakdown(
    path: &Path,
    steps: &[(usize, RewardTerms)],
    cfg: &RewardConfig,
) -> Result<()> {
    let mut out = String::from("step,term,value,weighted\n");
    for (step, terms) in steps {
        for t in Term::ALL {
            if terms.active[t as usize] {
                let v = terms.get(t);
                out.push_str(&format!(
                    "{step},{},{},{}\n",
                    t.name(),
                    format_sig(v, 9),
                    format_sig(v * cfg.weight(t), 9)
                ));
            }
        }
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}
