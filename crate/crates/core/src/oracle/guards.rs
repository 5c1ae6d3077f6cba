use serde::{Deserialize, Serialize};

use super::{EnvFeedback, ModeKind};
use crate::{Error, Result};

/// Thresholds shared by the guard predicates, in meters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GuardParams {
    /// reach → manipulate when the robot is at most this far from the object.
    pub d_near: f64,
    /// manipulate → reach when the robot is farther than this from the object.
    pub d_far: f64,
    /// manipulate → detach when the object is at most this far from the target.
    pub d_goal: f64,
    /// detach → reach when the object is farther than this from the target.
    pub d_goal_exit: f64,
    /// Reach-avoid switching distance to the obstacle.
    pub delta: f64,
}

impl Default for GuardParams {
    fn default() -> Self {
        Self {
            d_near: 0.6,
            d_far: 1.2,
            d_goal: 0.3,
            d_goal_exit: 0.6,
            delta: 0.5,
        }
    }
}

impl GuardParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.d_near, self.d_far, self.d_goal, self.d_goal_exit, self.delta];
        if all.iter().any(|d| !d.is_finite() || *d <= 0.0) {
            return Err(Error::Config("guard thresholds must be positive".into()));
        }
        if self.d_far <= self.d_near {
            return Err(Error::Config(format!(
                "guard hysteresis requires d_far > d_near (got {} <= {})",
                self.d_far, self.d_near
            )));
        }
        if self.d_goal_exit < self.d_goal {
            return Err(Error::Config("d_goal_exit must be >= d_goal".into()));
        }
        Ok(())
    }
}

/// Predicate over environment feedback enabling one discrete jump.
///
/// For the reach-avoid oracle `p_object` carries the obstacle and
/// `p_target` the goal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuardPredicate {
    /// ‖p_robot − p_object‖ ≤ d_near
    RobotNearObject,
    /// ‖p_robot − p_object‖ > d_far
    RobotLostObject,
    /// ‖p_object − p_target‖ ≤ d_goal while ‖p_robot − p_object‖ ≤ d_far
    ObjectAtTarget,
    /// ‖p_object − p_target‖ > d_goal_exit
    ObjectLeftGoal,
    /// ‖p_robot − p_obstacle‖ < δ
    ObstacleWithin,
    /// ‖p_robot − p_obstacle‖ ≥ δ
    ObstacleClear,
}

impl GuardPredicate {
    pub fn holds(self, params: &GuardParams, fb: &EnvFeedback) -> bool {
        let robot_object = (fb.p_robot - fb.p_object).norm();
        let object_target = (fb.p_object - fb.p_target).norm();
        match self {
            Self::RobotNearObject => robot_object <= params.d_near,
            Self::RobotLostObject => robot_object > params.d_far,
            Self::ObjectAtTarget => object_target <= params.d_goal && robot_object <= params.d_far,
            Self::ObjectLeftGoal => object_target > params.d_goal_exit,
            Self::ObstacleWithin => robot_object < params.delta,
            Self::ObstacleClear => robot_object >= params.delta,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub from: ModeKind,
    pub to: ModeKind,
    pub predicate: GuardPredicate,
}

/// Permissible non-self transitions of an automaton. Self-transitions are
/// always permitted and never listed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GuardTable {
    transitions: Vec<Transition>,
    params: GuardParams,
}

impl GuardTable {
    pub fn new(transitions: Vec<Transition>, params: GuardParams) -> Result<Self> {
        params.validate()?;
        if transitions.iter().any(|t| t.from == t.to) {
            return Err(Error::Config("self-transitions are implicit".into()));
        }
        Ok(Self {
            transitions,
            params,
        })
    }

    /// reach → manipulate → detach, with manipulate → reach and detach → reach
    /// for recovery.
    pub fn loco_manipulation(params: GuardParams) -> Result<Self> {
        use GuardPredicate::*;
        use ModeKind::*;
        Self::new(
            vec![
                Transition { from: Reach, to: Manipulate, predicate: RobotNearObject },
                Transition { from: Manipulate, to: Reach, predicate: RobotLostObject },
                Transition { from: Manipulate, to: Detach, predicate: ObjectAtTarget },
                Transition { from: Detach, to: Reach, predicate: ObjectLeftGoal },
            ],
            params,
        )
    }

    pub fn reach_avoid(params: GuardParams) -> Result<Self> {
        use GuardPredicate::*;
        use ModeKind::*;
        Self::new(
            vec![
                Transition { from: Reach, to: Avoid, predicate: ObstacleWithin },
                Transition { from: Avoid, to: Reach, predicate: ObstacleClear },
            ],
            params,
        )
    }

    pub fn params(&self) -> &GuardParams {
        &self.params
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn permits(&self, from: ModeKind, to: ModeKind) -> bool {
        from == to || self.transitions.iter().any(|t| t.from == from && t.to == to)
    }

    /// Targets of every non-self transition out of `from` whose guard holds.
    pub fn enabled<'a>(
        &'a self,
        from: ModeKind,
        fb: &'a EnvFeedback,
    ) -> impl Iterator<Item = ModeKind> + 'a {
        self.transitions
            .iter()
            .filter(move |t| t.from == from && t.predicate.holds(&self.params, fb))
            .map(|t| t.to)
    }
}
