//! Train a reach-avoid policy and report goal arrival over 100 evaluation
//! episodes.
//!
//! ```text
//! cargo run --release --example train_reach_avoid -- [iterations] [seed]
//! ```

use std::time::Instant;

use pogmp::config::RunConfig;
use pogmp::metrics::aggregate;
use pogmp::policy::{evaluate, train, PolicySet};
use pogmp::world::{FailureReason, TaskKind};

fn main() -> pogmp::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let mut args = std::env::args().skip(1);
    let iterations = args.next().and_then(|a| a.parse().ok()).unwrap_or(60);
    let seed = args.next().and_then(|a| a.parse().ok()).unwrap_or(1);

    let mut cfg = RunConfig::paper_defaults(TaskKind::ReachAvoid);
    cfg.seed = seed;
    cfg.train.total_iterations = iterations;
    let start = Instant::now();
    let out = train(&cfg.env_config(), &cfg.train_config(), None)?;
    println!("trained {iterations} iterations in {:.1?}", start.elapsed());

    let eval = evaluate(PolicySet::Single(&out.policy), &cfg.env_config(), 100, 10_000, false)?;
    let report = aggregate("single", &eval.records)?;
    println!("goal arrival {:.1}%", report.success_pct);
    for reason in FailureReason::ALL {
        println!("  {:<16} {:.1}%", reason.name(), report.failure_pct(reason));
    }
    Ok(())
}
