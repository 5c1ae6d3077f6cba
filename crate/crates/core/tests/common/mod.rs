#![allow(dead_code)]

use pogmp::oracle::ReferenceState;
use pogmp::policy::{EnvConfig, GuidedEnv, StepResult};
use pogmp::world::PlanarWorldState;
use pogmp::Vec2;

/// Reference equal to the measured state.
pub fn reference_of(s: &PlanarWorldState) -> ReferenceState {
    ReferenceState {
        p_robot: s.robot.p,
        heading: s.robot.heading_vec(),
        v_robot: s.robot.v,
        omega_robot: s.robot.omega,
        p_object: s.object.map_or(Vec2::zeros(), |o| o.p),
        v_object: s.object.map_or(Vec2::zeros(), |o| o.v),
    }
}

/// PD wrench toward a reference state, in newtons.
pub fn pd_wrench(s: &PlanarWorldState, r: &ReferenceState, mass: f64) -> [f64; 3] {
    let a = (r.p_robot - s.robot.p) * 20.0 + (r.v_robot - s.robot.v) * 8.0;
    [mass * a.x, mass * a.y, 0.0]
}

/// Scripted closed-loop rollout: PD tracking of the oracle's reference
/// until the episode ends. Returns every step result.
pub fn scripted_rollout(cfg: &EnvConfig, training: bool, seed: u64) -> Vec<StepResult> {
    let mut env = GuidedEnv::new(cfg.clone(), training).expect("env");
    env.reset(seed).expect("reset");
    let mass = cfg.spec.body.robot_mass;
    let mut reference = env.window().states[0];
    let mut out = Vec::new();
    loop {
        let action = pd_wrench(env.world(), &reference, mass);
        let r = env.step(action);
        reference = r.reference;
        let done = r.end.is_some();
        out.push(r);
        if done {
            return out;
        }
    }
}
