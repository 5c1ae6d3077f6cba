//! Ball coasting under drag and rolling resistance, then a single
//! robot-ball impact with the momentum and restitution check.

use pogmp::oracle::ModeKind;
use pogmp::world::{reset, resolve_contact, TaskKind, TaskSpec};
use pogmp::Vec2;

fn main() -> pogmp::Result<()> {
    let mut spec = TaskSpec::paper_defaults(TaskKind::SoccerStop);
    spec.init_randomization = 0.0;
    let mut s = reset(&spec, 0)?;
    s.robot.p = Vec2::new(-3.0, -3.0);
    let ball = s.object.as_mut().expect("soccer has a ball");
    ball.p = Vec2::zeros();
    ball.v = Vec2::new(3.0, 0.0);

    println!("  t [s]   speed [m/s]   x [m]");
    for k in 0..=80 {
        if k % 10 == 0 {
            let o = s.object.unwrap();
            println!("{:6.2}   {:10.4}   {:6.3}", s.t, o.v.norm(), o.p.x);
        }
        s.step([0.0; 3], &spec, ModeKind::Reach)?;
    }

    let o = s.object.as_mut().unwrap();
    o.p = s.robot.p + Vec2::new(0.35, 0.0);
    o.v = Vec2::new(-1.0, 0.0);
    s.robot.v = Vec2::new(0.5, 0.0);
    let n = Vec2::x();
    let (robot, ball) = (&mut s.robot, s.object.as_mut().unwrap());
    let p0 = robot.mass * robot.v.dot(&n) + ball.mass * ball.v.dot(&n);
    let v0 = (ball.v - robot.v).dot(&n);
    let res = resolve_contact(robot, ball);
    let p1 = robot.mass * robot.v.dot(&n) + ball.mass * ball.v.dot(&n);
    let v1 = (ball.v - robot.v).dot(&n);
    println!("impulse {:.4} N s", res.normal_impulse);
    println!("normal momentum {p0:.6} -> {p1:.6}");
    println!("relative normal velocity {v0:.4} -> {v1:.4} (restitution {})", ball.restitution);
    Ok(())
}
