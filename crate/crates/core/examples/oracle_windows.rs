//! Query the soccer oracle along a straight robot approach and print the
//! active mode and the first reference states of each window.

use pogmp::oracle::{EnvFeedback, OracleConfig};
use pogmp::world::{reset, TaskKind, TaskSpec};
use pogmp::Vec2;

fn main() -> pogmp::Result<()> {
    let mut spec = TaskSpec::paper_defaults(TaskKind::SoccerStop);
    spec.init_randomization = 0.0;
    let mut oracle = OracleConfig::default().build(&spec)?;
    let s0 = reset(&spec, 0)?;
    let ball = s0.object_position();
    let target = spec.target;
    println!("modes: {:?}", oracle.modes());

    let start = s0.robot.p;
    for k in 0..=10 {
        let s = k as f64 / 10.0;
        let fb = EnvFeedback {
            p_robot: start + (ball - start) * s,
            p_object: ball,
            p_target: target,
            t: k as f64 * oracle.horizon(),
        };
        let w = oracle.query(&fb, 0.0)?;
        let last = w.states.last().expect("non-empty window");
        println!(
            "t={:4.1}  robot-ball {:.2} m  mode {:<10} rank {}  robot ref {:>5.2},{:>5.2} -> {:>5.2},{:>5.2}  object ref -> {:>5.2},{:>5.2}",
            fb.t,
            (fb.p_robot - ball).norm(),
            w.mode.kind.name(),
            w.mode.rank,
            w.states[0].p_robot.x,
            w.states[0].p_robot.y,
            last.p_robot.x,
            last.p_robot.y,
            last.p_object.x,
            last.p_object.y,
        );
    }

    // Moving far from the ball again returns to reach.
    let fb = EnvFeedback {
        p_robot: ball + Vec2::new(-2.0, 0.0),
        p_object: ball,
        p_target: target,
        t: 11.0,
    };
    println!("after retreating: {}", oracle.query(&fb, 0.0)?.mode.kind);
    Ok(())
}
