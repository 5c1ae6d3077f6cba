use std::fs;

use pogmp::cli;
use pogmp::config::RunConfig;
use pogmp::policy::{
    collect_rollouts, evaluate, train, train_multi_policy_baseline, ActorCritic, Checkpoint, Collector,
    PolicyEntry, PolicySet, ResetMode, RngState,
};
use pogmp::world::TaskKind;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small(kind: TaskKind) -> RunConfig {
    let mut cfg = RunConfig::paper_defaults(kind);
    cfg.train.total_iterations = 3;
    cfg.train.n_envs = 4;
    cfg.train.n_steps = 32;
    cfg.train.architecture.hidden = vec![16, 16];
    cfg
}

fn run_cli(args: &[&str]) -> i32 {
    cli::run(std::iter::once("pogmp").chain(args.iter().copied()))
}

#[test]
fn rollouts_are_reproducible() {
    let cfg = small(TaskKind::SoccerStop);
    let env = cfg.env_config();
    let ac = ActorCritic::new(
        env.policy_input_dim(),
        &cfg.train.architecture,
        env.spec.body.wrench_limits(),
        &mut ChaCha8Rng::seed_from_u64(0),
    );
    let collect = || {
        let mut c = Collector::new(&env, 4, 9, ResetMode::Nominal).unwrap();
        let (buf, records, last) = collect_rollouts(&ac, &mut c, 48).unwrap();
        (buf.obs, buf.actions, buf.rewards, records, last)
    };
    let a = collect();
    let b = collect();
    assert_eq!(a, b);
    assert!(!a.3.is_empty(), "48 steps should finish some episodes");
}

#[test]
fn training_is_reproducible_and_reports_budget() {
    let cfg = small(TaskKind::ReachAvoid);
    let a = train(&cfg.env_config(), &cfg.train_config(), None).unwrap();
    let b = train(&cfg.env_config(), &cfg.train_config(), None).unwrap();
    assert_eq!(a.policy.params, b.policy.params);
    assert_eq!(a.curve.len(), 3);
    let steps: usize = a.curve.iter().map(|c| c.env_steps).sum();
    assert_eq!(steps, 3 * 4 * 32);
}

#[test]
fn baseline_has_three_policies_and_equal_budget() {
    let cfg = small(TaskKind::SoccerStop);
    let single = train(&cfg.env_config(), &cfg.train_config(), None).unwrap();
    let multi = train_multi_policy_baseline(&cfg.env_config(), &cfg.train_config(), None).unwrap();
    assert_eq!(multi.policies.len(), 3);
    assert_eq!(multi.param_count(), 3 * single.policy.param_count());
    let steps = |c: &[pogmp::policy::IterationStats]| c.iter().map(|s| s.env_steps).sum::<usize>();
    let multi_steps: usize = multi.curves.iter().map(|(_, c)| steps(c)).sum();
    assert_eq!(multi_steps, steps(&single.curve));
}

#[test]
fn checkpoint_reload_reproduces_evaluation() {
    let cfg = small(TaskKind::SoccerStop);
    let out = train(&cfg.env_config(), &cfg.train_config(), None).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ck.json");
    let ck = Checkpoint::new(
        vec![PolicyEntry::new(None, &out.policy)],
        3,
        out.rng.clone(),
        serde_json::to_value(&cfg).unwrap(),
    );
    ck.save(&path).unwrap();
    let loaded = Checkpoint::load(&path).unwrap();
    assert_eq!(loaded, ck);
    let policy = loaded.policies[0].to_policy().unwrap();
    assert_eq!(policy.params, out.policy.params);
    let before = evaluate(PolicySet::Single(&out.policy), &cfg.env_config(), 8, 0, true).unwrap();
    let after = evaluate(PolicySet::Single(&policy), &cfg.env_config(), 8, 0, true).unwrap();
    assert_eq!(before.records, after.records);
    assert_eq!(before.trajectories, after.trajectories);
    let rng: RngState = loaded.rng;
    assert_eq!(rng.restore().unwrap().get_word_pos().to_string(), rng.word_pos);
}

#[test]
fn corrupt_checkpoints_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, r#"{"version": 1, "iteration": 0}"#).unwrap();
    let e = Checkpoint::load(&path).unwrap_err().to_string();
    assert!(e.contains("missing field"), "{e}");
    fs::write(&path, r#"{"iteration": 0}"#).unwrap();
    assert!(Checkpoint::load(&path).unwrap_err().to_string().contains("version"));
    fs::write(&path, "not json").unwrap();
    assert!(Checkpoint::load(&path).is_err());
}

#[test]
fn config_echo_round_trips() {
    let overrides = vec![
        "train.preference_enabled=false".to_string(),
        "task.task=\"reach_avoid\"".to_string(),
        "seed=5".to_string(),
    ];
    let cfg = RunConfig::from_toml_str("[eval]\nepisodes = 7\n", &overrides).unwrap();
    assert!(!cfg.train.preference_enabled);
    assert_eq!(cfg.task.task, TaskKind::ReachAvoid);
    assert_eq!(cfg.eval.episodes, 7);
    let echo = cfg.echo().unwrap();
    assert!(echo.contains("preference_enabled = false"));
    let again = RunConfig::from_toml_str(&echo, &[]).unwrap();
    assert_eq!(again, cfg);
    assert_eq!(again.echo().unwrap(), echo);
}

#[test]
fn cli_train_eval_plot_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let out_s = out.to_str().unwrap();
    let code = run_cli(&[
        "train",
        "--seed", "7",
        "--set", "train.total_iterations=2",
        "--set", "train.n_envs=4",
        "--set", "train.n_steps=16",
        "--set", "train.preference_enabled=false",
        "--out", out_s,
    ]);
    assert_eq!(code, cli::EXIT_OK);
    let echo = fs::read_to_string(out.join("config.echo")).unwrap();
    assert!(echo.contains("preference_enabled = false"));
    assert!(echo.contains("seed = 7"));
    let curves = fs::read_to_string(out.join("curves.csv")).unwrap();
    assert_eq!(curves.lines().count(), 3);
    assert!(out.join("checkpoints/final.json").is_file());

    assert_eq!(run_cli(&["eval", "--checkpoint", out_s, "--episodes", "4"]), cli::EXIT_OK);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report[0]["table"].as_array().unwrap().len(), 4);
    assert_eq!(report[0]["policy"], "single-pref");
    assert!(out.join("traces/episode_0000.csv").is_file());

    assert_eq!(
        run_cli(&["plot", "--run", out_s, "--vars", "px,vx", "--transition-matrix"]),
        cli::EXIT_OK
    );
    let svg = fs::read_to_string(out.join("plots/episode_0000.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert!(out.join("plots/transition.svg").is_file());
    assert_eq!(run_cli(&["plot", "--run", out_s, "--vars", "nope"]), cli::EXIT_USAGE);
}

#[test]
fn cli_eval_rejects_mismatched_task() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let out_s = out.to_str().unwrap();
    let code = run_cli(&[
        "train",
        "--set", "train.total_iterations=1",
        "--set", "train.n_envs=2",
        "--set", "train.n_steps=8",
        "--out", out_s,
    ]);
    assert_eq!(code, cli::EXIT_OK);
    let cfg = dir.path().join("other.toml");
    fs::write(&cfg, "[task]\ntask = \"reach_avoid\"\n").unwrap();
    let cfg_s = cfg.to_str().unwrap();
    assert_eq!(
        run_cli(&["eval", "--checkpoint", out_s, "--config", cfg_s, "--episodes", "2"]),
        cli::EXIT_FAULT
    );
}

#[test]
fn cli_usage_errors() {
    assert_eq!(run_cli(&["train", "--config", "/nonexistent/run.toml"]), cli::EXIT_USAGE);
    assert_eq!(run_cli(&["frobnicate"]), cli::EXIT_USAGE);
    assert_eq!(run_cli(&["train", "--set", "novalue"]), cli::EXIT_USAGE);
    assert_eq!(run_cli(&["train", "--set", "train.bogus=1"]), cli::EXIT_USAGE);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("ck.json");
    fs::write(&bad, r#"{"version": 99}"#).unwrap();
    assert_eq!(run_cli(&["eval", "--checkpoint", bad.to_str().unwrap()]), cli::EXIT_FAULT);
}
