//! Command-line surface: `train`, `eval`, `ablate` and `plot`.
//!
//! Every run directory has the same layout: `config.echo`, `checkpoints/`,
//! `curves*.csv`, `report.txt`, `report.json` and `traces/`.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::info;

use crate::ablation::{run_ablation, ARM_MULTI, ARM_NO_PREFERENCE, ARM_PREFERENCE};
use crate::config::RunConfig;
use crate::metrics::{aggregate_over, emit_traces, format_table, heatmap_svg, write_reports, TransitionMatrix};
use crate::policy::{
    evaluate, train, train_multi_policy_baseline, write_curves_csv, Checkpoint, MultiPolicy, PolicyEntry,
    PolicySet,
};
use crate::world::write_trajectory_csv;
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_FAULT: i32 = 3;

pub const CONFIG_ECHO: &str = "config.echo";
pub const CHECKPOINT_DIR: &str = "checkpoints";
pub const FINAL_CHECKPOINT: &str = "final.json";
pub const TRACES_DIR: &str = "traces";

#[derive(Debug, Parser)]
#[command(name = "pogmp", version, about = "Oracle-guided multi-mode policy training and analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a policy and write checkpoints, curves and the effective config.
    Train(TrainArgs),
    /// Evaluate a checkpoint and write reports and trajectories.
    Eval(EvalArgs),
    /// Run the three-arm equal-budget comparison.
    Ablate(RunArgs),
    /// Plot trajectory traces or a transition matrix heatmap.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// `section.key=value` override, applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Evaluation episodes, overriding `eval.episodes`.
    #[arg(long)]
    pub episodes: Option<usize>,
    /// Output directory, overriding `out_dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Train the mode-specific policy baseline instead of a single policy.
    #[arg(long)]
    pub baseline: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Checkpoint file, or a run directory holding `checkpoints/final.json`.
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Optional config that must agree with the checkpoint's task.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub episodes: Option<usize>,
    /// First episode seed; episode `i` uses `seed + i`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory; defaults to the checkpoint's run directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Run directory with `traces/*.csv`.
    #[arg(long)]
    pub run: PathBuf,
    /// Comma-separated trajectory columns.
    #[arg(long, value_delimiter = ',')]
    pub vars: Vec<String>,
    /// Render transition matrix CSVs as heatmaps. Without a value every
    /// `transition_*.csv` in the run directory is rendered.
    #[arg(long, num_args = 0..=1, value_name = "CSV")]
    pub transition_matrix: Option<Option<PathBuf>>,
    /// Output directory; defaults to `<run>/plots`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parse `args` (program name first) and run the command. Returns the exit
/// status; diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Usage and configuration problems map to 2, everything else to 3.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_) | Error::Config(_) => EXIT_USAGE,
        _ => EXIT_FAULT,
    }
}

pub fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Train(a) => cmd_train(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::Ablate(a) => cmd_ablate(&a),
        Command::Plot(a) => cmd_plot(&a),
    }
}

/// Config file plus overrides. A missing file is a usage error naming it.
pub fn resolve_config(args: &RunArgs) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(p) => {
            if !p.is_file() {
                return Err(Error::Usage(format!("config file not found: {}", p.display())));
            }
            RunConfig::load(p, &args.overrides)?
        }
        None => RunConfig::from_toml_str("", &args.overrides)?,
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(n) = args.episodes {
        cfg.eval.episodes = n;
    }
    if let Some(o) = &args.out {
        cfg.out_dir = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn create_dir(d: &Path) -> Result<()> {
    fs::create_dir_all(d).map_err(|e| Error::io(d, e))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn config_json(cfg: &RunConfig) -> Result<serde_json::Value> {
    serde_json::to_value(cfg).map_err(|e| Error::Config(e.to_string()))
}

pub fn cmd_train(args: &TrainArgs) -> Result<()> {
    let cfg = resolve_config(&args.run)?;
    let out = cfg.out_dir.clone();
    let ck_dir = out.join(CHECKPOINT_DIR);
    create_dir(&ck_dir)?;
    write_file(&out.join(CONFIG_ECHO), &cfg.echo()?)?;
    let tc = cfg.train_config();
    let (entries, rng) = if args.baseline {
        let multi = train_multi_policy_baseline(&cfg.env_config(), &tc, Some(&ck_dir))?;
        for (mode, curve) in &multi.curves {
            write_curves_csv(&out.join(format!("curves_{}.csv", mode.name())), curve)?;
        }
        let entries = multi
            .policies
            .iter()
            .map(|(m, p)| PolicyEntry::new(Some(*m), p))
            .collect();
        (entries, multi.rng)
    } else {
        let outcome = train(&cfg.env_config(), &tc, Some(&ck_dir))?;
        write_curves_csv(&out.join("curves.csv"), &outcome.curve)?;
        (vec![PolicyEntry::new(None, &outcome.policy)], outcome.rng)
    };
    let ck = Checkpoint::new(entries, tc.total_iterations, rng, config_json(&cfg)?);
    let path = ck_dir.join(FINAL_CHECKPOINT);
    ck.save(&path)?;
    info!("wrote {}", path.display());
    Ok(())
}

fn checkpoint_path(p: &Path) -> PathBuf {
    if p.is_dir() {
        p.join(CHECKPOINT_DIR).join(FINAL_CHECKPOINT)
    } else {
        p.to_path_buf()
    }
}

fn run_dir_of(checkpoint: &Path) -> PathBuf {
    let parent = checkpoint.parent().unwrap_or(Path::new("."));
    if parent.file_name().is_some_and(|n| n == CHECKPOINT_DIR) {
        parent.parent().unwrap_or(Path::new(".")).to_path_buf()
    } else {
        parent.to_path_buf()
    }
}

/// Label used in reports for a loaded policy set.
fn policy_label(cfg: &RunConfig, multi: bool) -> &'static str {
    match (multi, cfg.train.preference_enabled) {
        (true, _) => ARM_MULTI,
        (false, true) => ARM_PREFERENCE,
        (false, false) => ARM_NO_PREFERENCE,
    }
}

pub fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let path = checkpoint_path(&args.checkpoint);
    let ck = Checkpoint::load(&path)?;
    let ck_err = |msg: String| Error::Checkpoint {
        path: path.clone(),
        msg,
    };
    let mut cfg: RunConfig =
        serde_json::from_value(ck.config.clone()).map_err(|e| ck_err(format!("config: {e}")))?;
    if let Some(c) = &args.config {
        let given = resolve_config(&RunArgs {
            config: Some(c.clone()),
            seed: None,
            overrides: Vec::new(),
            episodes: None,
            out: None,
        })?;
        if given.task != cfg.task {
            return Err(ck_err(format!(
                "trained on task {} but {} describes {}",
                cfg.task.task.name(),
                c.display(),
                given.task.task.name()
            )));
        }
    }
    if let Some(n) = args.episodes {
        cfg.eval.episodes = n;
    }
    if let Some(s) = args.seed {
        cfg.eval.seed = s;
    }
    let env_cfg = cfg.env_config();
    let policies = ck
        .policies
        .iter()
        .map(|e| Ok((e.mode, e.to_policy()?)))
        .collect::<Result<Vec<_>>>()?;
    for (_, p) in &policies {
        if p.obs_dim() != env_cfg.policy_input_dim() {
            return Err(ck_err(format!(
                "policy expects {} inputs, task provides {}",
                p.obs_dim(),
                env_cfg.policy_input_dim()
            )));
        }
    }
    let multi = policies.iter().all(|(m, _)| m.is_some());
    let fsm;
    let set = if multi {
        fsm = MultiPolicy {
            policies: policies.iter().map(|(m, p)| (m.expect("checked"), p.clone())).collect(),
            curves: Vec::new(),
            rng: ck.rng.clone(),
        };
        PolicySet::Fsm(&fsm)
    } else if policies.len() == 1 {
        PolicySet::Single(&policies[0].1)
    } else {
        return Err(ck_err("mixes mode-specific and single policies".into()));
    };
    let record = cfg.eval.trajectories > 0;
    let eval = evaluate(set, &env_cfg, cfg.eval.episodes, cfg.eval.seed, record)?;
    let report = aggregate_over(policy_label(&cfg, multi), &cfg.task_modes()?, &eval.records)?;
    let out = args.out.clone().unwrap_or_else(|| run_dir_of(&path));
    create_dir(&out)?;
    write_reports(&out, std::slice::from_ref(&report))?;
    report.transition.write_csv(&out.join("transition.csv"))?;
    if record {
        let traces = out.join(TRACES_DIR);
        create_dir(&traces)?;
        for (i, rows) in eval.trajectories.iter().take(cfg.eval.trajectories).enumerate() {
            write_trajectory_csv(&traces.join(format!("episode_{i:04}.csv")), rows)?;
        }
    }
    println!("{}", format_table(std::slice::from_ref(&report)));
    Ok(())
}

pub fn cmd_ablate(args: &RunArgs) -> Result<()> {
    let cfg = resolve_config(args)?;
    let out = cfg.out_dir.clone();
    create_dir(&out)?;
    write_file(&out.join(CONFIG_ECHO), &cfg.echo()?)?;
    let ablation = run_ablation(&cfg, Some(&out))?;
    let mut steps = String::from("arm,env_steps,param_count\n");
    for (label, r) in &ablation.arms {
        match r {
            Ok(arm) => {
                let t = &arm.report.transition;
                t.write_csv(&out.join(format!("transition_{label}.csv")))?;
                write_file(
                    &out.join(format!("transition_{label}_conditional.csv")),
                    &t.row_conditional_csv(),
                )?;
                steps.push_str(&format!("{label},{},{}\n", arm.env_steps, arm.param_count));
            }
            Err(e) => eprintln!("arm {label} failed: {e}"),
        }
    }
    write_file(&out.join("budget.csv"), &steps)?;
    let reports = ablation.reports();
    write_reports(&out, &reports)?;
    println!("{}", format_table(&reports));
    let failed: Vec<&str> = ablation
        .arms
        .iter()
        .filter(|(_, r)| r.is_err())
        .map(|(l, _)| l.as_str())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("arms failed: {}", failed.join(", "))))
    }
}

fn csv_files(dir: &Path, keep: impl Fn(&str) -> bool) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|x| x == "csv")
                && p.file_name().and_then(|n| n.to_str()).is_some_and(&keep)
        })
        .collect();
    files.sort();
    Ok(files)
}

pub fn cmd_plot(args: &PlotArgs) -> Result<()> {
    let out = args.out.clone().unwrap_or_else(|| args.run.join("plots"));
    if args.vars.is_empty() && args.transition_matrix.is_none() {
        return Err(Error::Usage("plot needs --vars and/or --transition-matrix".into()));
    }
    if !args.vars.is_empty() {
        let traces = args.run.join(TRACES_DIR);
        let inputs = csv_files(&traces, |n| !n.ends_with("_selected.csv"))?;
        if inputs.is_empty() {
            return Err(Error::Usage(format!("no trajectory CSVs in {}", traces.display())));
        }
        for p in emit_traces(&inputs, &args.vars, &out)? {
            info!("wrote {}", p.display());
        }
    }
    if let Some(choice) = &args.transition_matrix {
        let inputs = match choice {
            Some(p) => vec![p.clone()],
            None => csv_files(&args.run, |n| {
                n.starts_with("transition") && !n.ends_with("_conditional.csv")
            })?,
        };
        if inputs.is_empty() {
            return Err(Error::Usage(format!("no transition CSVs in {}", args.run.display())));
        }
        create_dir(&out)?;
        for input in inputs {
            let (modes, p) = TransitionMatrix::read_probabilities_csv(&input)?;
            let stem = input.file_stem().map_or("transition".into(), |s| s.to_string_lossy());
            let svg = out.join(format!("{stem}.svg"));
            write_file(&svg, &heatmap_svg(&modes, &p))?;
            info!("wrote {}", svg.display());
        }
    }
    Ok(())
}
