//! Soccer-stop comparison at equal budget: single policy with and without
//! the mode-preference reward, and three mode-specific policies switched by
//! the oracle.
//!
//! ```text
//! cargo run --release --example soccer_ablation -- [iterations] [seed] [episodes]
//! ```

use std::time::Instant;

use pogmp::ablation::run_ablation;
use pogmp::config::RunConfig;
use pogmp::metrics::format_table;
use pogmp::oracle::ModeKind;
use pogmp::world::TaskKind;

fn main() -> pogmp::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let mut args = std::env::args().skip(1);
    let iterations = args.next().and_then(|a| a.parse().ok()).unwrap_or(150);
    let seed = args.next().and_then(|a| a.parse().ok()).unwrap_or(0);
    let episodes = args.next().and_then(|a| a.parse().ok()).unwrap_or(100);

    let mut cfg = RunConfig::paper_defaults(TaskKind::SoccerStop);
    cfg.seed = seed;
    cfg.train.total_iterations = iterations;
    cfg.eval.episodes = episodes;
    let start = Instant::now();
    let ablation = run_ablation(&cfg, None)?;
    println!("finished in {:.1?}\n", start.elapsed());
    print!("{}", format_table(&ablation.reports()));
    for (label, arm) in &ablation.arms {
        match arm {
            Ok(a) => {
                let t = &a.report.transition;
                println!(
                    "{label:<14} params {:>7}  steps {:>8}  P(r->m) {:.4}  P(m->r) {:.4}  P(m->d) {:.4}",
                    a.param_count,
                    a.env_steps,
                    t.probability(ModeKind::Reach, ModeKind::Manipulate),
                    t.probability(ModeKind::Manipulate, ModeKind::Reach),
                    t.probability(ModeKind::Manipulate, ModeKind::Detach),
                );
                for (k, v) in &a.report.failure_pct {
                    if *v > 0.0 {
                        print!("  {k} {v:.1}%");
                    }
                }
                println!();
            }
            Err(e) => println!("{label:<14} failed: {e}"),
        }
    }
    Ok(())
}
