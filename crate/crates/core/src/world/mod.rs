//! Deterministic planar physics for the reach-avoid, soccer and move-box
//! tasks.

mod physics;
mod trajectory;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use physics::{drag_force, resolve_contact, ContactResult, StepInfo, BALL_DRAG_COEFFICIENT};
pub use trajectory::{format_sig, read_trajectory_csv, write_trajectory_csv, TrajectoryRow, TRAJECTORY_HEADER};

use crate::oracle::EnvFeedback;
use crate::{Error, Result, Vec2};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    ReachAvoid,
    SoccerStop,
    SoccerKick,
    MoveBox,
}

impl TaskKind {
    pub const fn name(self) -> &'static str {
        match self {
            Self::ReachAvoid => "reach_avoid",
            Self::SoccerStop => "soccer_stop",
            Self::SoccerKick => "soccer_kick",
            Self::MoveBox => "move_box",
        }
    }

    pub fn has_object(self) -> bool {
        self != Self::ReachAvoid
    }

    /// Whether the regularization rewards are on by default for this task.
    pub fn regularized(self) -> bool {
        self == Self::SoccerKick
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub center: Vec2,
    pub radius: f64,
}

impl Region {
    pub fn contains(&self, p: Vec2) -> bool {
        (p - self.center).norm() <= self.radius
    }
}

/// Obstacle placement for reach-avoid: a point obstacle at `along` meters
/// down the start → goal line and `lateral` meters to a random side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleSpec {
    pub along: [f64; 2],
    pub lateral: [f64; 2],
    pub radius: f64,
}

/// Masses, shapes and actuation limits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyParams {
    pub robot_mass: f64,
    pub robot_radius: f64,
    pub robot_inertia: f64,
    pub force_limit: f64,
    pub torque_limit: f64,
    pub ball_mass: f64,
    pub ball_radius: f64,
    pub ball_restitution: f64,
    /// Rolling-resistance coefficient; deceleration is this times gravity.
    pub ball_rolling_resistance: f64,
    pub box_mass: f64,
    pub box_half_extents: Vec2,
    pub box_restitution: f64,
    /// Coulomb coefficient at the robot–box contact.
    pub box_friction: f64,
    /// Effective ground friction coefficient of the box.
    pub box_ground_friction: f64,
    pub gravity: f64,
}

impl Default for BodyParams {
    fn default() -> Self {
        Self {
            robot_mass: 10.0,
            robot_radius: 0.25,
            robot_inertia: 0.5 * 10.0 * 0.25 * 0.25,
            force_limit: 40.0,
            torque_limit: 10.0,
            ball_mass: 0.45,
            ball_radius: 0.11,
            ball_restitution: 0.6,
            ball_rolling_resistance: 0.04,
            box_mass: 2.0,
            box_half_extents: Vec2::new(0.25, 0.25),
            box_restitution: 0.1,
            box_friction: 0.5,
            box_ground_friction: 0.3,
            gravity: 9.81,
        }
    }
}

impl BodyParams {
    pub fn wrench_limits(&self) -> [f64; 3] {
        [self.force_limit, self.force_limit, self.torque_limit]
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            self.robot_mass,
            self.robot_radius,
            self.robot_inertia,
            self.force_limit,
            self.torque_limit,
            self.ball_mass,
            self.ball_radius,
            self.box_mass,
            self.box_half_extents.x,
            self.box_half_extents.y,
            self.gravity,
        ];
        if positive.iter().any(|x| !x.is_finite() || *x <= 0.0) {
            return Err(Error::Config("body masses, sizes and limits must be positive".into()));
        }
        for e in [self.ball_restitution, self.box_restitution] {
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::Config(format!("restitution {e} outside [0, 1]")));
            }
        }
        let frictions = [
            self.ball_rolling_resistance,
            self.box_friction,
            self.box_ground_friction,
        ];
        if frictions.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::Config("friction coefficients must be >= 0".into()));
        }
        Ok(())
    }
}

/// One task variant ψ: geometry, randomization and episode limits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub task: TaskKind,
    pub arena_half_extents: Vec2,
    /// Where the object is to be brought (reach-avoid: the goal).
    pub target: Vec2,
    /// Success region for the object (soccer-kick: the goal mouth).
    pub goal_region: Region,
    /// Where the robot must stand at the end of a successful episode.
    pub detach_region: Region,
    /// Half-width of the uniform perturbation on the robot's initial pose.
    pub init_randomization: f64,
    pub episode_max_steps: usize,
    pub dt: f64,
    /// Initial robot–object distance.
    pub object_distance: f64,
    /// Half-width (radians) of the random object bearing about the
    /// start → target direction. Unused for soccer-kick.
    pub object_bearing_range: f64,
    pub obstacle: ObstacleSpec,
    /// Object speed below which it counts as at rest.
    pub rest_speed: f64,
    pub body: BodyParams,
}

impl TaskSpec {
    pub fn paper_defaults(task: TaskKind) -> Self {
        let obstacle = ObstacleSpec {
            along: [1.0, 2.0],
            lateral: [0.15, 0.8],
            radius: 0.1,
        };
        let body = BodyParams::default();
        match task {
            TaskKind::ReachAvoid => Self {
                task,
                arena_half_extents: Vec2::new(5.0, 3.0),
                target: Vec2::new(3.0, 0.0),
                goal_region: Region { center: Vec2::new(3.0, 0.0), radius: 0.3 },
                detach_region: Region { center: Vec2::new(3.0, 0.0), radius: 0.3 },
                init_randomization: 0.05,
                episode_max_steps: 200,
                dt: 0.05,
                object_distance: 2.0,
                object_bearing_range: 0.0,
                obstacle,
                rest_speed: 0.05,
                body,
            },
            TaskKind::SoccerStop | TaskKind::MoveBox => Self {
                task,
                arena_half_extents: Vec2::new(8.0, 5.0),
                target: Vec2::new(4.0, 0.0),
                goal_region: Region { center: Vec2::new(4.0, 0.0), radius: 0.3 },
                detach_region: Region { center: Vec2::new(4.0, 0.0), radius: 1.0 },
                init_randomization: 0.05,
                episode_max_steps: 400,
                dt: 0.05,
                object_distance: 2.0,
                object_bearing_range: std::f64::consts::FRAC_PI_3,
                obstacle,
                rest_speed: 0.05,
                body,
            },
            TaskKind::SoccerKick => Self {
                task,
                arena_half_extents: Vec2::new(8.0, 5.0),
                target: Vec2::new(4.0, 0.0),
                goal_region: Region { center: Vec2::new(7.0, 0.0), radius: 0.75 },
                detach_region: Region { center: Vec2::new(4.0, 0.0), radius: 1.0 },
                init_randomization: 0.05,
                episode_max_steps: 400,
                dt: 0.05,
                object_distance: 2.0,
                object_bearing_range: 0.0,
                obstacle,
                rest_speed: 0.05,
                body,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive (got {})", self.dt)));
        }
        if self.episode_max_steps == 0 {
            return Err(Error::Config("episode_max_steps must be > 0".into()));
        }
        if !(self.init_randomization >= 0.0 && self.init_randomization.is_finite()) {
            return Err(Error::Config("init_randomization must be >= 0".into()));
        }
        if self.arena_half_extents.iter().any(|x| !(*x > 0.0)) {
            return Err(Error::Config("arena extents must be positive".into()));
        }
        for (name, r) in [("goal_region", &self.goal_region), ("detach_region", &self.detach_region)] {
            if !(r.radius > 0.0) || !self.in_arena(r.center) {
                return Err(Error::Config(format!("{name} must lie inside the arena")));
            }
        }
        if !self.in_arena(self.target) {
            return Err(Error::Config("target must lie inside the arena".into()));
        }
        let o = &self.obstacle;
        if o.along[0] > o.along[1] || o.lateral[0] > o.lateral[1] || o.radius <= 0.0 {
            return Err(Error::Config("obstacle ranges must be ordered, radius positive".into()));
        }
        if !(self.object_distance > 0.0) || self.object_bearing_range < 0.0 {
            return Err(Error::Config("object placement must be positive".into()));
        }
        self.body.validate()
    }

    pub fn in_arena(&self, p: Vec2) -> bool {
        p.x.abs() <= self.arena_half_extents.x && p.y.abs() <= self.arena_half_extents.y
    }

    /// Feedback for the oracle: robot, object (or obstacle), target and time.
    pub fn feedback(&self, state: &PlanarWorldState) -> EnvFeedback {
        EnvFeedback {
            p_robot: state.robot.p,
            p_object: state.object_position(),
            p_target: self.target,
            t: state.t,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobotBody {
    pub p: Vec2,
    pub heading: f64,
    pub v: Vec2,
    pub omega: f64,
    pub mass: f64,
    pub inertia: f64,
    pub radius: f64,
    /// Last applied (clamped) wrench: force x, force y, torque.
    pub u_prev: [f64; 3],
}

impl RobotBody {
    pub fn heading_vec(&self) -> Vec2 {
        Vec2::new(self.heading.cos(), self.heading.sin())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectKind {
    Ball,
    Box,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Geometry {
    Disc { radius: f64 },
    Rect { half_extents: Vec2 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectBody {
    pub kind: ObjectKind,
    pub p: Vec2,
    pub v: Vec2,
    pub theta: f64,
    pub omega: f64,
    pub mass: f64,
    pub inertia: f64,
    pub geometry: Geometry,
    pub restitution: f64,
    pub friction_mu: f64,
}

impl ObjectBody {
    pub fn ball(p: Vec2, body: &BodyParams) -> Self {
        let r = body.ball_radius;
        Self {
            kind: ObjectKind::Ball,
            p,
            v: Vec2::zeros(),
            theta: 0.0,
            omega: 0.0,
            mass: body.ball_mass,
            inertia: 0.4 * body.ball_mass * r * r,
            geometry: Geometry::Disc { radius: r },
            restitution: body.ball_restitution,
            friction_mu: 0.0,
        }
    }

    pub fn box_at(p: Vec2, theta: f64, body: &BodyParams) -> Self {
        let h = body.box_half_extents;
        Self {
            kind: ObjectKind::Box,
            p,
            v: Vec2::zeros(),
            theta,
            omega: 0.0,
            mass: body.box_mass,
            inertia: body.box_mass * (4.0 * h.x * h.x + 4.0 * h.y * h.y) / 12.0,
            geometry: Geometry::Rect { half_extents: h },
            restitution: body.box_restitution,
            friction_mu: body.box_friction,
        }
    }

    /// Smallest characteristic size, used for penetration diagnostics.
    pub fn min_extent(&self) -> f64 {
        match self.geometry {
            Geometry::Disc { radius } => radius,
            Geometry::Rect { half_extents } => half_extents.x.min(half_extents.y),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub p: Vec2,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanarWorldState {
    pub robot: RobotBody,
    /// Absent for reach-avoid.
    pub object: Option<ObjectBody>,
    /// Present only for reach-avoid.
    pub obstacle: Option<Obstacle>,
    pub t: f64,
    pub step_index: usize,
    /// Robot–object contacts while the oracle was in manipulate mode.
    pub contact_count: usize,
    /// Set when the state left the numerically sane envelope.
    pub diverged: bool,
}

impl PlanarWorldState {
    /// Object position, or the obstacle position for reach-avoid.
    pub fn object_position(&self) -> Vec2 {
        match (&self.object, &self.obstacle) {
            (Some(o), _) => o.p,
            (None, Some(ob)) => ob.p,
            (None, None) => Vec2::zeros(),
        }
    }

    pub fn object_velocity(&self) -> Vec2 {
        self.object.map_or(Vec2::zeros(), |o| o.v)
    }
}

/// Sample an initial state for `spec`. Deterministic in `(spec, seed)`.
pub fn reset(spec: &TaskSpec, seed: u64) -> Result<PlanarWorldState> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = spec.init_randomization;
    let body = &spec.body;
    let robot = RobotBody {
        p: Vec2::new(rng.random_range(-w..=w), rng.random_range(-w..=w)),
        heading: rng.random_range(-w..=w),
        v: Vec2::zeros(),
        omega: 0.0,
        mass: body.robot_mass,
        inertia: body.robot_inertia,
        radius: body.robot_radius,
        u_prev: [0.0; 3],
    };
    let base = spec.target.y.atan2(spec.target.x);
    let (object, obstacle) = match spec.task {
        TaskKind::ReachAvoid => {
            let o = &spec.obstacle;
            let along = rng.random_range(o.along[0]..=o.along[1]);
            let lateral = rng.random_range(o.lateral[0]..=o.lateral[1]);
            let side = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let fwd = Vec2::new(base.cos(), base.sin());
            let left = Vec2::new(-fwd.y, fwd.x);
            let p = fwd * along + left * (side * lateral);
            (None, Some(Obstacle { p, radius: o.radius }))
        }
        TaskKind::SoccerKick => {
            let p = Vec2::new(base.cos(), base.sin()) * spec.object_distance;
            (Some(ObjectBody::ball(p, body)), None)
        }
        TaskKind::SoccerStop | TaskKind::MoveBox => {
            let b = spec.object_bearing_range;
            let bearing = base + rng.random_range(-b..=b);
            let p = Vec2::new(bearing.cos(), bearing.sin()) * spec.object_distance;
            let obj = if spec.task == TaskKind::MoveBox {
                ObjectBody::box_at(p, 0.0, body)
            } else {
                ObjectBody::ball(p, body)
            };
            (Some(obj), None)
        }
    };
    Ok(PlanarWorldState {
        robot,
        object,
        obstacle,
        t: 0.0,
        step_index: 0,
        contact_count: 0,
        diverged: false,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    /// The robot left the arena; the planar stand-in for a fall.
    OutOfArena,
    /// Reach-avoid: the robot touched the obstacle.
    Collision,
    Divergence,
    Timeout,
    /// Training only: the rollout left the ρ-neighbourhood of the reference.
    ReferenceBound,
    /// Mode-specific baseline training only: the oracle left the policy's
    /// mode toward a lower rank.
    ModeExit,
}

impl FailureReason {
    pub const ALL: [FailureReason; 6] = [
        Self::OutOfArena,
        Self::Collision,
        Self::Divergence,
        Self::Timeout,
        Self::ReferenceBound,
        Self::ModeExit,
    ];

    pub const fn name(self) -> &'static str {
        match self {
            Self::OutOfArena => "out_of_arena",
            Self::Collision => "collision",
            Self::Divergence => "divergence",
            Self::Timeout => "timeout",
            Self::ReferenceBound => "reference_bound",
            Self::ModeExit => "mode_exit",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpisodeStatus {
    Running,
    Success,
    Failure(FailureReason),
}

/// Classify the state as running, success or failure.
pub fn episode_status(state: &PlanarWorldState, spec: &TaskSpec) -> EpisodeStatus {
    let robot_in_detach = spec.detach_region.contains(state.robot.p);
    let success = match (spec.task, &state.object) {
        (TaskKind::ReachAvoid, _) => spec.goal_region.contains(state.robot.p),
        (TaskKind::SoccerKick, Some(o)) => spec.goal_region.contains(o.p) && robot_in_detach,
        (_, Some(o)) => {
            spec.goal_region.contains(o.p) && o.v.norm() <= spec.rest_speed && robot_in_detach
        }
        (_, None) => false,
    };
    if success && !state.diverged {
        return EpisodeStatus::Success;
    }
    if state.diverged {
        return EpisodeStatus::Failure(FailureReason::Divergence);
    }
    if !spec.in_arena(state.robot.p) {
        return EpisodeStatus::Failure(FailureReason::OutOfArena);
    }
    if let Some(ob) = &state.obstacle {
        if (state.robot.p - ob.p).norm() < state.robot.radius + ob.radius {
            return EpisodeStatus::Failure(FailureReason::Collision);
        }
    }
    if state.step_index >= spec.episode_max_steps {
        return EpisodeStatus::Failure(FailureReason::Timeout);
    }
    EpisodeStatus::Running
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_randomization_gives_nominal_pose() {
        let mut spec = TaskSpec::paper_defaults(TaskKind::SoccerStop);
        spec.init_randomization = 0.0;
        for seed in 0..20 {
            let s = reset(&spec, seed).unwrap();
            assert_eq!(s.robot.p, Vec2::zeros());
            assert_eq!(s.robot.heading, 0.0);
        }
    }

    #[test]
    fn reset_is_deterministic() {
        for task in [TaskKind::ReachAvoid, TaskKind::SoccerStop, TaskKind::SoccerKick, TaskKind::MoveBox] {
            let spec = TaskSpec::paper_defaults(task);
            assert_eq!(reset(&spec, 42).unwrap(), reset(&spec, 42).unwrap());
        }
    }

    #[test]
    fn perturbation_stays_in_band() {
        let spec = TaskSpec::paper_defaults(TaskKind::SoccerKick);
        for seed in 0..10_000 {
            let s = reset(&spec, seed).unwrap();
            for c in [s.robot.p.x, s.robot.p.y, s.robot.heading] {
                assert!((-0.05..=0.05).contains(&c), "seed {seed}: {c}");
            }
        }
    }

    #[test]
    fn object_placed_at_nominal_distance() {
        for task in [TaskKind::SoccerStop, TaskKind::SoccerKick, TaskKind::MoveBox] {
            let spec = TaskSpec::paper_defaults(task);
            for seed in 0..50 {
                let s = reset(&spec, seed).unwrap();
                let o = s.object.unwrap();
                assert!((o.p.norm() - 2.0).abs() < 1e-12);
                if task == TaskKind::SoccerKick {
                    assert!(o.p.y.abs() < 1e-12 && o.p.x > 0.0);
                }
            }
        }
    }

    #[test]
    fn invalid_spec_rejected() {
        let mut spec = TaskSpec::paper_defaults(TaskKind::SoccerStop);
        spec.dt = 0.0;
        assert!(reset(&spec, 0).is_err());
        let mut spec = TaskSpec::paper_defaults(TaskKind::SoccerStop);
        spec.goal_region.center = Vec2::new(100.0, 0.0);
        assert!(reset(&spec, 0).is_err());
    }

    fn soccer_state() -> (TaskSpec, PlanarWorldState) {
        let mut spec = TaskSpec::paper_defaults(TaskKind::SoccerKick);
        spec.init_randomization = 0.0;
        let s = reset(&spec, 0).unwrap();
        (spec, s)
    }

    #[test]
    fn success_when_ball_in_goal_and_robot_detached() {
        let (spec, mut s) = soccer_state();
        s.object.as_mut().unwrap().p = Vec2::new(7.0, 0.1);
        s.robot.p = Vec2::new(3.5, 0.0);
        assert_eq!(episode_status(&s, &spec), EpisodeStatus::Success);
        s.robot.p = Vec2::new(1.0, 0.0);
        assert_eq!(episode_status(&s, &spec), EpisodeStatus::Running);
    }

    #[test]
    fn out_of_arena_and_timeout() {
        let (spec, mut s) = soccer_state();
        s.robot.p = Vec2::new(8.01, 0.0);
        assert_eq!(episode_status(&s, &spec), EpisodeStatus::Failure(FailureReason::OutOfArena));
        let (spec, mut s) = soccer_state();
        s.step_index = spec.episode_max_steps;
        assert_eq!(episode_status(&s, &spec), EpisodeStatus::Failure(FailureReason::Timeout));
    }

    #[test]
    fn stop_success_requires_rest() {
        let mut spec = TaskSpec::paper_defaults(TaskKind::SoccerStop);
        spec.init_randomization = 0.0;
        let mut s = reset(&spec, 3).unwrap();
        s.robot.p = Vec2::new(3.4, 0.0);
        let o = s.object.as_mut().unwrap();
        o.p = Vec2::new(4.1, 0.0);
        o.v = Vec2::new(0.06, 0.0);
        assert_eq!(episode_status(&s, &spec), EpisodeStatus::Running);
        s.object.as_mut().unwrap().v = Vec2::new(0.05, 0.0);
        assert_eq!(episode_status(&s, &spec), EpisodeStatus::Success);
    }
}
