//! Mode-transition matrices from scripted rollouts: PD tracking of the
//! oracle reference on soccer-stop, with and without a mid-episode retreat.

use pogmp::config::RunConfig;
use pogmp::metrics::{heatmap_svg, transition_matrix_over};
use pogmp::oracle::ModeKind;
use pogmp::policy::GuidedEnv;
use pogmp::world::TaskKind;

fn rollout(cfg: &pogmp::policy::EnvConfig, seed: u64, retreat: bool) -> pogmp::Result<Vec<ModeKind>> {
    let mut env = GuidedEnv::new(cfg.clone(), false)?;
    env.reset(seed)?;
    let mass = cfg.spec.body.robot_mass;
    let mut reference = env.window().states[0];
    let mut trace = Vec::new();
    loop {
        let w = env.world();
        let action = if retreat && (60..90).contains(&w.step_index) {
            [-40.0, 0.0, 0.0]
        } else {
            let a = (reference.p_robot - w.robot.p) * 20.0 + (reference.v_robot - w.robot.v) * 8.0;
            [mass * a.x, mass * a.y, 0.0]
        };
        let r = env.step(action);
        reference = r.reference;
        trace.push(r.mode.kind);
        if r.end.is_some() {
            return Ok(trace);
        }
    }
}

fn main() -> pogmp::Result<()> {
    let cfg = RunConfig::paper_defaults(TaskKind::SoccerStop);
    let modes = cfg.task_modes()?;
    let env = cfg.env_config();
    for retreat in [false, true] {
        let traces = (0..10)
            .map(|s| rollout(&env, s, retreat))
            .collect::<pogmp::Result<Vec<_>>>()?;
        let t = transition_matrix_over(&modes, &traces)?;
        println!("retreat = {retreat}\n{}", t.to_csv());
        println!("self-transition mass {:.4}\n", t.self_mass());
        if retreat {
            let path = std::env::temp_dir().join("transition_retreat.svg");
            std::fs::write(&path, heatmap_svg(&t.modes, &t.probabilities))
                .map_err(|e| pogmp::Error::InvalidArgument(e.to_string()))?;
            println!("heatmap written to {}", path.display());
        }
    }
    Ok(())
}
