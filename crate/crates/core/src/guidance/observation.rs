use std::f64::consts::TAU;

use crate::world::{PlanarWorldState, TaskSpec};

pub const OBS_DIM: usize = 18;

/// Policy observation with a fixed layout:
///
/// | index | content |
/// |-------|---------|
/// | 0..2  | heading cos, sin |
/// | 2..4  | robot linear velocity |
/// | 4     | robot angular velocity |
/// | 5..8  | previous wrench, normalized by the limits |
/// | 8..10 | object − robot |
/// | 10..12| object velocity |
/// | 12..14| target − robot |
/// | 14..16| goal − robot |
/// | 16..18| phase cos, sin |
///
/// It carries neither reference contents nor the oracle's mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observation(pub [f64; OBS_DIM]);

impl Observation {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

pub fn observe(
    world: &PlanarWorldState,
    spec: &TaskSpec,
    phase_step: usize,
    horizon_steps: usize,
) -> Observation {
    let r = &world.robot;
    let limits = spec.body.wrench_limits();
    let d_obj = world.object_position() - r.p;
    let v_obj = world.object_velocity();
    let d_target = spec.target - r.p;
    let d_goal = spec.goal_region.center - r.p;
    let phase = TAU * phase_step as f64 / horizon_steps.max(1) as f64;
    Observation([
        r.heading.cos(),
        r.heading.sin(),
        r.v.x,
        r.v.y,
        r.omega,
        r.u_prev[0] / limits[0],
        r.u_prev[1] / limits[1],
        r.u_prev[2] / limits[2],
        d_obj.x,
        d_obj.y,
        v_obj.x,
        v_obj.y,
        d_target.x,
        d_target.y,
        d_goal.x,
        d_goal.y,
        phase.cos(),
        phase.sin(),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{reset, TaskKind};

    fn rest_state() -> (TaskSpec, PlanarWorldState) {
        let mut spec = TaskSpec::paper_defaults(TaskKind::SoccerStop);
        spec.init_randomization = 0.0;
        let s = reset(&spec, 0).unwrap();
        (spec, s)
    }

    #[test]
    fn zero_state_prefix() {
        let (spec, s) = rest_state();
        let o = observe(&s, &spec, 0, 20);
        assert_eq!(&o.0[..5], &[1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn phase_entries() {
        let (spec, s) = rest_state();
        let o = observe(&s, &spec, 0, 20);
        assert_eq!(&o.0[16..], &[1.0, 0.0]);
        let o = observe(&s, &spec, 10, 20);
        assert!((o.0[16] + 1.0).abs() < 1e-12 && o.0[17].abs() < 1e-12);
    }

    #[test]
    fn relative_positions() {
        let (spec, s) = rest_state();
        let o = observe(&s, &spec, 3, 20);
        let obj = s.object.unwrap().p;
        assert_eq!([o.0[8], o.0[9]], [obj.x, obj.y]);
        assert_eq!([o.0[12], o.0[13]], [4.0, 0.0]);
        assert!(o.0.iter().all(|x| x.is_finite()));
    }
}
