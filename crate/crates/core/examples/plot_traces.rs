//! Train a short reach-avoid policy, record evaluation trajectories and
//! render position and velocity traces with mode bands.
//!
//! ```text
//! cargo run --release --example plot_traces -- [iterations] [out_dir]
//! ```

use std::path::PathBuf;

use pogmp::config::RunConfig;
use pogmp::metrics::emit_traces;
use pogmp::policy::{evaluate, train, PolicySet};
use pogmp::world::{write_trajectory_csv, TaskKind};

fn main() -> pogmp::Result<()> {
    let mut args = std::env::args().skip(1);
    let iterations = args.next().and_then(|a| a.parse().ok()).unwrap_or(20);
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("pogmp_traces"));

    let mut cfg = RunConfig::paper_defaults(TaskKind::ReachAvoid);
    cfg.train.total_iterations = iterations;
    let trained = train(&cfg.env_config(), &cfg.train_config(), None)?;
    let eval = evaluate(PolicySet::Single(&trained.policy), &cfg.env_config(), 3, 0, true)?;

    let traces = out.join("traces");
    std::fs::create_dir_all(&traces).map_err(|e| pogmp::Error::InvalidArgument(e.to_string()))?;
    let mut inputs = Vec::new();
    for (i, rows) in eval.trajectories.iter().enumerate() {
        let p = traces.join(format!("episode_{i:04}.csv"));
        write_trajectory_csv(&p, rows)?;
        inputs.push(p);
    }
    let vars = ["px", "py", "vx", "vy"].map(String::from);
    for p in emit_traces(&inputs, &vars, &out.join("plots"))? {
        println!("{}", p.display());
    }
    Ok(())
}
