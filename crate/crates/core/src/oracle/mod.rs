//! Hybrid-automaton reference oracles.
//!
//! An oracle is a tuple of discrete modes, guarded transitions between them
//! and per-mode reference dynamics. Each query evaluates the guards against
//! environment feedback and then produces a finite-horizon
//! [`ReferenceWindow`] for the active mode, re-anchored at the measured
//! robot position.

mod guards;
mod interpolate;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use guards::{GuardParams, GuardPredicate, GuardTable, Transition};
pub use interpolate::{horizon_steps, interpolate};

use interpolate::{path, step_toward};

use crate::{unit, wrap_angle, Error, Result, Vec2};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeKind {
    Reach,
    Manipulate,
    Detach,
    Avoid,
}

impl ModeKind {
    pub const ALL: [ModeKind; 4] = [Self::Reach, Self::Manipulate, Self::Detach, Self::Avoid];

    pub const fn name(self) -> &'static str {
        match self {
            Self::Reach => "reach",
            Self::Manipulate => "manipulate",
            Self::Detach => "detach",
            Self::Avoid => "avoid",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }
}

impl fmt::Display for ModeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A mode together with its preference rank. Higher ranks point in the
/// preferred direction of transitions; ranks may be shared.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeId {
    pub kind: ModeKind,
    pub rank: u32,
}

/// Environment feedback λ_t. For reach-avoid, `p_object` is the obstacle
/// and `p_target` the goal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvFeedback {
    pub p_robot: Vec2,
    pub p_object: Vec2,
    pub p_target: Vec2,
    pub t: f64,
}

impl EnvFeedback {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.p_robot, self.p_object, self.p_target]
            .iter()
            .flat_map(|v| v.iter())
            .all(|x| x.is_finite());
        if !finite || !self.t.is_finite() {
            return Err(Error::Feedback(format!("non-finite value in {self:?}")));
        }
        if self.t < 0.0 {
            return Err(Error::Feedback(format!("negative time {}", self.t)));
        }
        Ok(())
    }
}

/// One reference sample: robot and object centre-of-mass states.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceState {
    pub p_robot: Vec2,
    /// Unit heading vector.
    pub heading: Vec2,
    pub v_robot: Vec2,
    pub omega_robot: f64,
    pub p_object: Vec2,
    pub v_object: Vec2,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceWindow {
    pub states: Vec<ReferenceState>,
    pub mode: ModeId,
    pub t_start: f64,
    pub dt: f64,
}

impl ReferenceWindow {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Terminal behaviour of the detach mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum DetachVariant {
    /// Bring the object to rest at the target.
    Stop,
    /// Send the object toward `goal` at the kick speed.
    Kick { goal: Vec2 },
}

/// Reference parameters of the three-mode loco-manipulation oracle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocoDynamics {
    /// Robot reference speed, m/s. Also caps robot reference motion in
    /// every other mode.
    pub reach_speed: f64,
    /// Object reference speed toward the target while manipulating, m/s.
    pub manipulate_speed: f64,
    pub kick_speed: f64,
    /// Distance behind the object (along object → target) the robot aims for.
    pub standoff: f64,
    /// Distance the robot backs off from the object when detaching.
    pub detach_standoff: f64,
    pub variant: DetachVariant,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReachAvoidDynamics {
    pub speed: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ReferenceDynamics {
    LocoManipulation(LocoDynamics),
    ReachAvoid(ReachAvoidDynamics),
}

impl ReferenceDynamics {
    /// Upper bound on robot reference speed; consecutive robot waypoints are
    /// at most this times `dt` apart.
    pub fn max_robot_speed(&self) -> f64 {
        match self {
            Self::LocoManipulation(d) => d.reach_speed,
            Self::ReachAvoid(d) => d.speed,
        }
    }

    fn validate(&self) -> Result<()> {
        let speeds: Vec<f64> = match self {
            Self::LocoManipulation(d) => vec![
                d.reach_speed,
                d.manipulate_speed,
                d.kick_speed,
                d.standoff,
                d.detach_standoff,
            ],
            Self::ReachAvoid(d) => vec![d.speed],
        };
        if speeds.iter().any(|s| !s.is_finite() || *s <= 0.0) {
            return Err(Error::Config("reference speeds and distances must be positive".into()));
        }
        Ok(())
    }
}

/// A multi-mode oracle Ξ = (modes, reference state, feedback, dynamics,
/// transitions).
#[derive(Clone, Debug, PartialEq)]
pub struct HybridOracle {
    modes: Vec<ModeId>,
    guards: GuardTable,
    dynamics: ReferenceDynamics,
    initial: ModeKind,
    current: ModeKind,
    horizon: f64,
    dt: f64,
    detach_anchor: Option<Vec2>,
    last_t: Option<f64>,
}

impl HybridOracle {
    pub fn new(
        modes: Vec<ModeId>,
        guards: GuardTable,
        dynamics: ReferenceDynamics,
        initial: ModeKind,
        horizon: f64,
        dt: f64,
    ) -> Result<Self> {
        if !(dt > 0.0 && horizon >= dt && dt.is_finite() && horizon.is_finite()) {
            return Err(Error::Config(format!(
                "oracle needs dt > 0 and horizon >= dt (got dt={dt}, horizon={horizon})"
            )));
        }
        dynamics.validate()?;
        for (i, m) in modes.iter().enumerate() {
            if modes[..i].iter().any(|o| o.kind == m.kind) {
                return Err(Error::Config(format!("duplicate mode {}", m.kind)));
            }
        }
        let known = |k: ModeKind| modes.iter().any(|m| m.kind == k);
        if !known(initial) {
            return Err(Error::Config(format!("initial mode {initial} not in automaton")));
        }
        if let Some(t) = guards
            .transitions()
            .iter()
            .find(|t| !known(t.from) || !known(t.to))
        {
            return Err(Error::Config(format!(
                "transition {} -> {} references an unknown mode",
                t.from, t.to
            )));
        }
        Ok(Self {
            modes,
            guards,
            dynamics,
            initial,
            current: initial,
            horizon,
            dt,
            detach_anchor: None,
            last_t: None,
        })
    }

    /// Three-mode oracle with ranks reach = 0, manipulate = 1, detach = 2.
    pub fn loco_manipulation(
        params: GuardParams,
        dynamics: LocoDynamics,
        horizon: f64,
        dt: f64,
    ) -> Result<Self> {
        Self::new(
            vec![
                ModeId { kind: ModeKind::Reach, rank: 0 },
                ModeId { kind: ModeKind::Manipulate, rank: 1 },
                ModeId { kind: ModeKind::Detach, rank: 2 },
            ],
            GuardTable::loco_manipulation(params)?,
            ReferenceDynamics::LocoManipulation(dynamics),
            ModeKind::Reach,
            horizon,
            dt,
        )
    }

    /// Two-mode reach-avoid oracle over a double-integrator robot. Avoid is
    /// ranked below reach so that falling back to avoid after reaching is
    /// what the preference term penalises.
    pub fn reach_avoid(
        params: GuardParams,
        dynamics: ReachAvoidDynamics,
        horizon: f64,
        dt: f64,
    ) -> Result<Self> {
        Self::new(
            vec![
                ModeId { kind: ModeKind::Reach, rank: 1 },
                ModeId { kind: ModeKind::Avoid, rank: 0 },
            ],
            GuardTable::reach_avoid(params)?,
            ReferenceDynamics::ReachAvoid(dynamics),
            ModeKind::Reach,
            horizon,
            dt,
        )
    }

    /// Replace the rank of one mode.
    pub fn with_rank(mut self, kind: ModeKind, rank: u32) -> Result<Self> {
        let m = self
            .modes
            .iter_mut()
            .find(|m| m.kind == kind)
            .ok_or_else(|| Error::Config(format!("mode {kind} not in automaton")))?;
        m.rank = rank;
        Ok(self)
    }

    pub fn modes(&self) -> &[ModeId] {
        &self.modes
    }

    pub fn mode_kinds(&self) -> Vec<ModeKind> {
        self.modes.iter().map(|m| m.kind).collect()
    }

    pub fn guards(&self) -> &GuardTable {
        &self.guards
    }

    pub fn dynamics(&self) -> &ReferenceDynamics {
        &self.dynamics
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn horizon_steps(&self) -> usize {
        horizon_steps(self.horizon, self.dt)
    }

    pub fn mode(&self, kind: ModeKind) -> Option<ModeId> {
        self.modes.iter().copied().find(|m| m.kind == kind)
    }

    pub fn current_mode(&self) -> ModeId {
        self.mode(self.current).expect("current mode is always a member")
    }

    pub fn rank(&self, kind: ModeKind) -> Option<u32> {
        self.mode(kind).map(|m| m.rank)
    }

    /// Start a new episode in the initial mode.
    pub fn reset(&mut self) {
        self.current = self.initial;
        self.detach_anchor = None;
        self.last_t = None;
    }

    /// Start a new episode in `kind`, as used when training mode-specific
    /// policies from mode-appropriate initial states.
    pub fn reset_in_mode(&mut self, kind: ModeKind, fb: &EnvFeedback) -> Result<()> {
        fb.validate()?;
        if self.mode(kind).is_none() {
            return Err(Error::InvalidArgument(format!("mode {kind} not in automaton")));
        }
        self.reset();
        self.enter(kind, fb);
        Ok(())
    }

    fn enter(&mut self, kind: ModeKind, fb: &EnvFeedback) {
        self.current = kind;
        if kind == ModeKind::Detach {
            if let ReferenceDynamics::LocoManipulation(d) = self.dynamics {
                let away = unit(fb.p_object - fb.p_robot).unwrap_or_else(Vec2::x);
                self.detach_anchor = Some(fb.p_object - away * d.detach_standoff);
            }
        }
    }

    /// Evaluate the guards out of the current mode, take the enabled jump
    /// (if any) and return the resulting mode.
    pub fn evaluate_guards(&mut self, fb: &EnvFeedback) -> Result<ModeId> {
        fb.validate()?;
        if let Some(last) = self.last_t {
            if fb.t < last {
                return Err(Error::Feedback(format!(
                    "time went backwards ({} after {last})",
                    fb.t
                )));
            }
        }
        self.last_t = Some(fb.t);

        let mut enabled = self.guards.enabled(self.current, fb);
        let next = enabled.next();
        if let Some(second) = enabled.next() {
            return Err(Error::GuardConflict {
                mode: self.current,
                first: next.expect("first precedes second"),
                second,
            });
        }
        drop(enabled);
        if let Some(to) = next {
            self.enter(to, fb);
        }
        Ok(self.current_mode())
    }

    /// Evaluate guards, then generate the reference window of the active mode.
    pub fn query(&mut self, fb: &EnvFeedback, heading: f64) -> Result<ReferenceWindow> {
        self.evaluate_guards(fb)?;
        self.plan(fb, heading)
    }

    /// Reference window for the current mode without evaluating guards.
    /// `heading` is the measured robot heading, used when the reference
    /// direction is degenerate.
    pub fn plan(&self, fb: &EnvFeedback, heading: f64) -> Result<ReferenceWindow> {
        fb.validate()?;
        let steps = self.horizon_steps();
        let dt = self.dt;
        let (robot, object, face, v_object) = match self.dynamics {
            ReferenceDynamics::LocoManipulation(d) => self.loco_paths(&d, fb, steps),
            ReferenceDynamics::ReachAvoid(d) => self.reach_avoid_paths(&d, fb, steps),
        };
        debug_assert_eq!(robot.len(), steps + 1);

        let fallback = Vec2::new(heading.cos(), heading.sin());
        let mut headings = Vec::with_capacity(steps + 1);
        for k in 0..=steps {
            let prev = headings.last().copied().unwrap_or(fallback);
            headings.push(unit(face[k] - robot[k]).unwrap_or(prev));
        }

        let states = (0..steps)
            .map(|k| {
                let a0 = headings[k].y.atan2(headings[k].x);
                let a1 = headings[k + 1].y.atan2(headings[k + 1].x);
                ReferenceState {
                    p_robot: robot[k],
                    heading: headings[k],
                    v_robot: (robot[k + 1] - robot[k]) / dt,
                    omega_robot: wrap_angle(a1 - a0) / dt,
                    p_object: object[k],
                    v_object: v_object.unwrap_or((object[k + 1] - object[k]) / dt),
                }
            })
            .collect();
        Ok(ReferenceWindow {
            states,
            mode: self.current_mode(),
            t_start: fb.t,
            dt,
        })
    }

    /// Robot path, object path, facing targets and an optional constant
    /// object velocity override, each with `steps + 1` samples.
    #[allow(clippy::type_complexity)]
    fn loco_paths(
        &self,
        d: &LocoDynamics,
        fb: &EnvFeedback,
        steps: usize,
    ) -> (Vec<Vec2>, Vec<Vec2>, Vec<Vec2>, Option<Vec2>) {
        let dt = self.dt;
        let push_dir = unit(fb.p_target - fb.p_object)
            .or_else(|| unit(fb.p_object - fb.p_robot))
            .unwrap_or_else(Vec2::x);
        match self.current {
            ModeKind::Manipulate => {
                let object = path(fb.p_object, fb.p_target, d.manipulate_speed, dt, steps);
                let mut robot = Vec::with_capacity(steps + 1);
                robot.push(fb.p_robot);
                for k in 1..=steps {
                    let aim = object[k] - push_dir * d.standoff;
                    robot.push(step_toward(robot[k - 1], aim, d.reach_speed * dt));
                }
                let face = object.clone();
                (robot, object, face, None)
            }
            ModeKind::Detach => {
                let anchor = self.detach_anchor.unwrap_or(fb.p_robot);
                let robot = path(fb.p_robot, anchor, d.reach_speed, dt, steps);
                match d.variant {
                    DetachVariant::Stop => {
                        let object = vec![fb.p_target; steps + 1];
                        let face = object.clone();
                        (robot, object, face, Some(Vec2::zeros()))
                    }
                    DetachVariant::Kick { goal } => {
                        let object = path(fb.p_object, goal, d.kick_speed, dt, steps);
                        let v = unit(goal - fb.p_object).map_or(Vec2::zeros(), |u| u * d.kick_speed);
                        (robot, object, vec![goal; steps + 1], Some(v))
                    }
                }
            }
            // Reach, and any mode this oracle does not define.
            _ => {
                let aim = fb.p_object - push_dir * d.standoff;
                let robot = path(fb.p_robot, aim, d.reach_speed, dt, steps);
                let object = vec![fb.p_object; steps + 1];
                let face = object.clone();
                (robot, object, face, Some(Vec2::zeros()))
            }
        }
    }

    #[allow(clippy::type_complexity)]
    fn reach_avoid_paths(
        &self,
        d: &ReachAvoidDynamics,
        fb: &EnvFeedback,
        steps: usize,
    ) -> (Vec<Vec2>, Vec<Vec2>, Vec<Vec2>, Option<Vec2>) {
        let dt = self.dt;
        let robot = match self.current {
            ModeKind::Avoid => {
                let away = unit(fb.p_robot - fb.p_object)
                    .or_else(|| unit(fb.p_robot - fb.p_target))
                    .unwrap_or_else(|| -Vec2::x());
                // Constant-velocity flight: the target is never reached inside
                // the window.
                let far = fb.p_robot + away * (d.speed * dt * (steps as f64 + 1.0));
                path(fb.p_robot, far, d.speed, dt, steps)
            }
            _ => path(fb.p_robot, fb.p_target, d.speed, dt, steps),
        };
        let object = vec![fb.p_object; steps + 1];
        (robot, object, vec![fb.p_target; steps + 1], Some(Vec2::zeros()))
    }
}

/// Query a reach-avoid oracle. Fails if `oracle` has loco-manipulation
/// dynamics.
pub fn reach_avoid_query(
    oracle: &mut HybridOracle,
    fb: &EnvFeedback,
    heading: f64,
) -> Result<ReferenceWindow> {
    if !matches!(oracle.dynamics, ReferenceDynamics::ReachAvoid(_)) {
        return Err(Error::InvalidArgument("not a reach-avoid oracle".into()));
    }
    oracle.query(fb, heading)
}

/// Serializable oracle parameters; [`OracleConfig::build`] picks the
/// automaton that matches a task.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    /// Receding horizon t_H, seconds.
    pub horizon: f64,
    pub guards: GuardParams,
    pub reach_speed: f64,
    pub manipulate_speed: f64,
    pub kick_speed: f64,
    pub standoff: f64,
    pub detach_standoff: f64,
    /// Nominal speed of the reach-avoid oracle, both modes.
    pub reach_avoid_speed: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            horizon: 1.0,
            guards: GuardParams::default(),
            reach_speed: 0.75,
            manipulate_speed: 0.5,
            kick_speed: 2.0,
            standoff: 0.4,
            detach_standoff: 0.5,
            reach_avoid_speed: 0.75,
        }
    }
}

impl OracleConfig {
    pub fn build(&self, spec: &crate::world::TaskSpec) -> Result<HybridOracle> {
        use crate::world::TaskKind;
        let variant = match spec.task {
            TaskKind::ReachAvoid => {
                return HybridOracle::reach_avoid(
                    self.guards,
                    ReachAvoidDynamics {
                        speed: self.reach_avoid_speed,
                    },
                    self.horizon,
                    spec.dt,
                );
            }
            TaskKind::SoccerKick => DetachVariant::Kick {
                goal: spec.goal_region.center,
            },
            TaskKind::SoccerStop | TaskKind::MoveBox => DetachVariant::Stop,
        };
        HybridOracle::loco_manipulation(
            self.guards,
            LocoDynamics {
                reach_speed: self.reach_speed,
                manipulate_speed: self.manipulate_speed,
                kick_speed: self.kick_speed,
                standoff: self.standoff,
                detach_standoff: self.detach_standoff,
                variant,
            },
            self.horizon,
            spec.dt,
        )
    }
}
