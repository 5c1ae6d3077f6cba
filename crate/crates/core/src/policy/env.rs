use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::guidance::{
    check_termination, object_rewards, observe, preference_reward, regularization_rewards,
    total_reward, tracking_rewards, DeviationBounds, RankTrace, RewardConfig, RewardTerms, Term,
    Termination, OBS_DIM,
};
use crate::oracle::{
    HybridOracle, ModeId, ModeKind, OracleConfig, ReferenceState, ReferenceWindow,
};
use crate::world::{
    episode_status, reset, EpisodeStatus, FailureReason, PlanarWorldState, TaskSpec, TrajectoryRow,
};
use crate::{unit, Result, Vec2};

/// Everything a guided environment needs besides its seed.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvConfig {
    pub spec: TaskSpec,
    pub oracle: OracleConfig,
    pub rewards: RewardConfig,
    pub bounds: DeviationBounds,
    pub preference_enabled: bool,
    /// Number of stacked observation frames fed to the policy.
    pub frame_stack: usize,
}

impl EnvConfig {
    pub fn policy_input_dim(&self) -> usize {
        OBS_DIM * self.frame_stack
    }
}

/// Outcome of one finished episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub outcome: EpisodeStatus,
    pub steps: usize,
    /// Robot–object contacts made while the oracle was in manipulate.
    pub ball_contacts: usize,
    /// Active mode after each step; `mode_trace.len() == steps`.
    pub mode_trace: Vec<ModeKind>,
    #[serde(rename = "return")]
    pub ret: f64,
    pub pref_violations: usize,
}

impl EpisodeRecord {
    pub fn is_success(&self) -> bool {
        self.outcome == EpisodeStatus::Success
    }
}

/// How a step ended the episode, for bootstrapping.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EpisodeEnd {
    /// No future reward: failure or reference-bound violation.
    Terminated,
    /// Cut short; the value of the final observation stands in for the rest.
    Truncated,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    pub reward: f64,
    pub terms: RewardTerms,
    pub mode: ModeId,
    pub reference: ReferenceState,
    pub contact: bool,
    pub wrench: [f64; 3],
    pub end: Option<(EpisodeEnd, EpisodeRecord)>,
}

/// A planar world coupled to its oracle and the guidance terms.
///
/// The oracle is consulted after every physics step. A fresh reference
/// window is planned when the phase wraps (every `H` steps) or when the
/// mode changes, and the reward at step `t` uses entry `t − t_plan` of the
/// current window.
#[derive(Clone, Debug)]
pub struct GuidedEnv {
    cfg: EnvConfig,
    oracle: HybridOracle,
    world: PlanarWorldState,
    window: ReferenceWindow,
    window_start: usize,
    trace: RankTrace,
    frames: Vec<f64>,
    training: bool,
    focus: Option<ModeKind>,
    ep_return: f64,
    mode_trace: Vec<ModeKind>,
    violations: usize,
}

impl GuidedEnv {
    /// `training` enables reference-bound terminations.
    pub fn new(cfg: EnvConfig, training: bool) -> Result<Self> {
        cfg.spec.validate()?;
        cfg.rewards.validate()?;
        cfg.bounds.validate()?;
        let oracle = cfg.oracle.build(&cfg.spec)?;
        let world = reset(&cfg.spec, 0)?;
        let fb = cfg.spec.feedback(&world);
        let window = oracle.plan(&fb, world.robot.heading)?;
        let mut env = Self {
            frames: vec![0.0; cfg.policy_input_dim()],
            cfg,
            oracle,
            world,
            window,
            window_start: 0,
            trace: RankTrace::default(),
            training,
            focus: None,
            ep_return: 0.0,
            mode_trace: Vec::new(),
            violations: 0,
        };
        env.reset(0)?;
        Ok(env)
    }

    /// Restrict rewards and episode boundaries to one mode, as used by the
    /// mode-specific baseline policies.
    pub fn with_focus(mut self, mode: Option<ModeKind>) -> Self {
        self.focus = mode;
        self
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn world(&self) -> &PlanarWorldState {
        &self.world
    }

    pub fn oracle(&self) -> &HybridOracle {
        &self.oracle
    }

    pub fn current_mode(&self) -> ModeId {
        self.oracle.current_mode()
    }

    pub fn window(&self) -> &ReferenceWindow {
        &self.window
    }

    /// Stacked observation, newest frame first.
    pub fn observation(&self) -> &[f64] {
        &self.frames
    }

    pub fn reset(&mut self, seed: u64) -> Result<()> {
        let world = reset(&self.cfg.spec, seed)?;
        self.oracle.reset();
        self.start_episode(world)
    }

    /// Reset into a state suited to `mode` with per-coordinate perturbation
    /// half-width `half_width`, and start the oracle in that mode.
    pub fn reset_in_mode(&mut self, mode: ModeKind, half_width: f64, seed: u64) -> Result<()> {
        let mut spec = self.cfg.spec.clone();
        spec.init_randomization = half_width;
        let mut world = reset(&spec, seed)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        let g = self.cfg.oracle.guards;
        let standoff = self.cfg.oracle.standoff;
        let target = spec.target;
        let jitter = |rng: &mut ChaCha8Rng, w: f64| {
            Vec2::new(rng.random_range(-w..=w), rng.random_range(-w..=w))
        };
        let min_gap = world
            .object
            .as_ref()
            .map_or(world.robot.radius, |o| world.robot.radius + o.min_extent())
            + 0.02;
        let place_behind = |world: &mut PlanarWorldState, offset: Vec2, max_dist: f64| {
            let obj = world.object_position();
            let dir = unit(target - obj).unwrap_or_else(Vec2::x);
            let mut rel = -dir * standoff + offset;
            let d = rel.norm();
            if d > max_dist {
                rel *= max_dist / d;
            } else if d < min_gap {
                rel = unit(rel).unwrap_or(-dir) * min_gap;
            }
            world.robot.p = obj + rel;
            let face = -rel;
            world.robot.heading = face.y.atan2(face.x);
        };
        match mode {
            ModeKind::Manipulate if world.object.is_some() => {
                let off = jitter(&mut rng, half_width);
                place_behind(&mut world, off, g.d_near);
            }
            ModeKind::Detach if world.object.is_some() => {
                let mut d_obj = jitter(&mut rng, half_width);
                if d_obj.norm() > g.d_goal {
                    d_obj *= g.d_goal / d_obj.norm();
                }
                let speed = rng.random_range(0.0..=0.5 * self.cfg.oracle.manipulate_speed);
                if let Some(o) = world.object.as_mut() {
                    let dir = unit(target - o.p).unwrap_or_else(Vec2::x);
                    o.p = target + d_obj;
                    o.v = dir * speed;
                }
                let off = jitter(&mut rng, half_width);
                place_behind(&mut world, off, g.d_far);
            }
            _ => {}
        }
        let fb = self.cfg.spec.feedback(&world);
        self.oracle.reset_in_mode(mode, &fb)?;
        self.start_episode(world)
    }

    fn start_episode(&mut self, world: PlanarWorldState) -> Result<()> {
        self.world = world;
        let fb = self.cfg.spec.feedback(&self.world);
        let mode = self.oracle.evaluate_guards(&fb)?;
        self.window = self.oracle.plan(&fb, self.world.robot.heading)?;
        self.window_start = 0;
        self.trace = RankTrace::default();
        self.trace.observe(mode.rank);
        self.ep_return = 0.0;
        self.mode_trace.clear();
        self.violations = 0;
        let frame = self.frame();
        for chunk in self.frames.chunks_mut(OBS_DIM) {
            chunk.copy_from_slice(&frame);
        }
        Ok(())
    }

    fn frame(&self) -> [f64; OBS_DIM] {
        let h = self.oracle.horizon_steps();
        observe(&self.world, &self.cfg.spec, self.world.step_index % h, h).0
    }

    fn push_frame(&mut self) {
        let frame = self.frame();
        let n = self.frames.len();
        self.frames.copy_within(0..n - OBS_DIM, OBS_DIM);
        self.frames[..OBS_DIM].copy_from_slice(&frame);
    }

    /// Trajectory sample of the current state.
    pub fn trajectory_row(&self, wrench: [f64; 3], contact: bool) -> TrajectoryRow {
        let r = &self.world.robot;
        let op = self.world.object_position();
        let ov = self.world.object_velocity();
        TrajectoryRow {
            step: self.world.step_index,
            t: self.world.t,
            mode: self.oracle.current_mode().kind,
            p: [r.p.x, r.p.y],
            heading: r.heading,
            v: [r.v.x, r.v.y],
            omega: r.omega,
            object_p: [op.x, op.y],
            object_v: [ov.x, ov.y],
            wrench,
            contact,
        }
    }

    fn record(&self, outcome: EpisodeStatus) -> EpisodeRecord {
        EpisodeRecord {
            outcome,
            steps: self.mode_trace.len(),
            ball_contacts: self.world.contact_count,
            mode_trace: self.mode_trace.clone(),
            ret: self.ep_return,
            pref_violations: self.violations,
        }
    }

    fn fault(&mut self, msg: &str) -> StepResult {
        warn!("episode aborted by environment fault: {msg}");
        let mode = self.oracle.current_mode();
        self.mode_trace.push(mode.kind);
        let reference = self.window.states[0];
        StepResult {
            reward: 0.0,
            terms: RewardTerms::default(),
            mode,
            reference,
            contact: false,
            wrench: [0.0; 3],
            end: Some((
                EpisodeEnd::Terminated,
                self.record(EpisodeStatus::Failure(FailureReason::Divergence)),
            )),
        }
    }

    /// Apply `action` (a wrench) for one control step. The caller resets the
    /// environment after an episode end.
    pub fn step(&mut self, action: [f64; 3]) -> StepResult {
        let prev_wrench = self.world.robot.u_prev;
        let prev_mode = self.oracle.current_mode();
        let info = match self.world.step(action, &self.cfg.spec, prev_mode.kind) {
            Ok(info) => info,
            Err(e) => return self.fault(&e.to_string()),
        };
        let fb = self.cfg.spec.feedback(&self.world);
        let mode = match self.oracle.evaluate_guards(&fb) {
            Ok(m) => m,
            Err(e) => return self.fault(&e.to_string()),
        };
        let t = self.world.step_index;
        let h = self.oracle.horizon_steps();
        if t.is_multiple_of(h) || mode != prev_mode || t - self.window_start >= self.window.len() {
            match self.oracle.plan(&fb, self.world.robot.heading) {
                Ok(w) => {
                    self.window = w;
                    self.window_start = t;
                }
                Err(e) => return self.fault(&e.to_string()),
            }
        }
        let reference = self.window.states[t - self.window_start];

        let cfg = &self.cfg.rewards;
        let mut terms = tracking_rewards(&self.world, &reference, cfg)
            .merge(&object_rewards(&self.world, &reference, cfg, mode.rank))
            .merge(&regularization_rewards(&self.world.robot, info.wrench, prev_wrench, cfg));
        let (violated, trace) = preference_reward(self.trace, mode.rank);
        self.trace = trace;
        if violated > 0.0 {
            self.violations += 1;
        }
        if self.cfg.preference_enabled && self.focus.is_none() {
            terms.set(Term::ModePreference, violated);
        }
        let reward = total_reward(&terms, cfg);
        self.ep_return += reward;
        self.mode_trace.push(mode.kind);

        let mut end = None;
        match episode_status(&self.world, &self.cfg.spec) {
            EpisodeStatus::Success => {
                end = Some((EpisodeEnd::Truncated, EpisodeStatus::Success));
            }
            EpisodeStatus::Failure(FailureReason::Timeout) => {
                end = Some((
                    EpisodeEnd::Truncated,
                    EpisodeStatus::Failure(FailureReason::Timeout),
                ));
            }
            EpisodeStatus::Failure(r) => {
                end = Some((EpisodeEnd::Terminated, EpisodeStatus::Failure(r)));
            }
            EpisodeStatus::Running => {}
        }
        if end.is_none() {
            if let Termination::Terminate { .. } =
                check_termination(&self.world, &reference, &self.cfg.bounds, self.training)
            {
                end = Some((
                    EpisodeEnd::Terminated,
                    EpisodeStatus::Failure(FailureReason::ReferenceBound),
                ));
            }
        }
        if let (None, Some(focus)) = (end, self.focus) {
            if mode.kind != focus {
                let focus_rank = self.oracle.rank(focus).unwrap_or(0);
                end = Some(if mode.rank > focus_rank {
                    (EpisodeEnd::Truncated, EpisodeStatus::Success)
                } else {
                    (
                        EpisodeEnd::Terminated,
                        EpisodeStatus::Failure(FailureReason::ModeExit),
                    )
                });
            }
        }

        self.push_frame();
        StepResult {
            reward,
            terms,
            mode,
            reference,
            contact: info.contact,
            wrench: info.wrench,
            end: end.map(|(kind, outcome)| (kind, self.record(outcome))),
        }
    }
}
