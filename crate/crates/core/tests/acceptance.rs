//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always print. Positional
//! arguments select criteria by number (`cargo test --test acceptance -- 1 5`).
//! Criteria 8 and 9 train policies and dominate the runtime.

mod common;

use std::fs;
use std::path::Path;
use std::time::Instant;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pogmp::ablation::{run_ablation, ARM_MULTI, ARM_NO_PREFERENCE, ARM_PREFERENCE};
use pogmp::config::RunConfig;
use pogmp::guidance::{
    check_termination, object_rewards, preference_reward, regularization_rewards, total_reward,
    tracking_rewards, DeviationBounds, RankTrace, RewardConfig, Term, Termination,
};
use pogmp::metrics::{aggregate, transition_matrix};
use pogmp::oracle::ModeKind;
use pogmp::policy::{
    evaluate, gae, loss_and_grad, train, ActorCritic, ArchitectureSpec, LossCoefficients, MlpShape,
    Minibatch, PolicySet,
};
use pogmp::world::{reset, FailureReason, ObjectBody, RobotBody, TaskKind, TaskSpec};
use pogmp::Vec2;

// Pinned tolerances and budgets.
const GRAD_REL_TOL: f64 = 1e-4;
/// Floor on the relative-error denominator, so gradients that are zero
/// analytically compare against finite-difference noise in absolute terms.
const GRAD_REL_FLOOR: f64 = 1e-6;
const FD_STEP: f64 = 1e-5;
const GRAD_TRIALS: usize = 20;
const GAE_TOL: f64 = 1e-10;
const GAE_CASES: usize = 100;
const PROB_SUM_TOL: f64 = 1e-12;
const TERMINATION_SAMPLES: usize = 100_000;
const DRAG_STEPS: usize = 10_000;
const IMPACTS: usize = 1_000;
const IMPACT_TOL: f64 = 1e-9;
const REWARD_TOL: f64 = 1e-12;
const REACH_AVOID_ITERATIONS: usize = 600;
const REACH_AVOID_SEED: u64 = 1;
const REACH_AVOID_EVAL_SEED: u64 = 10_000;
const SOCCER_ITERATIONS: usize = 300;
const SOCCER_SEEDS: [u64; 3] = [0, 1, 2];
const EVAL_EPISODES: usize = 100;

struct Verdict {
    pass: bool,
    detail: String,
}

type Criterion = (usize, &'static str, fn() -> Verdict);

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn main() {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("error")).try_init();
    let selected: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let criteria: [Criterion; 10] = [
        (1, "preference reward vs brute force", c1_preference),
        (2, "analytic gradients vs finite differences", c2_gradients),
        (3, "GAE vs brute-force discounted sums", c3_gae),
        (4, "transition matrix contract", c4_transition),
        (5, "termination contract", c5_termination),
        (6, "physics conservation", c6_physics),
        (7, "reward table fidelity", c7_reward),
        (8, "desk-scale reach-avoid", c8_reach_avoid),
        (9, "soccer-stop directional ablation", c9_ablation),
        (10, "determinism", c10_determinism),
    ];
    let mut failed = Vec::new();
    for (n, name, f) in criteria {
        if !selected.is_empty() && !selected.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let v = f();
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {n:>2} {status}: {name} ({:.1} s) {}",
            start.elapsed().as_secs_f64(),
            v.detail
        );
        if !v.pass {
            failed.push(n);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}

fn c1_preference() -> Verdict {
    let start = Instant::now();
    let w = RewardConfig::paper_defaults().mode_preference;
    let mut mismatches = 0;
    let mut cases = 0;
    for code in 0..3usize.pow(6) {
        let ranks: Vec<u32> = (0..6).map(|i| ((code / 3usize.pow(i)) % 3) as u32).collect();
        let mut trace = RankTrace::default();
        for t in 0..6 {
            let (ind, next) = preference_reward(trace, ranks[t]);
            trace = next;
            let max = *ranks[..=t].iter().max().unwrap();
            let expected = if ranks[t] < max { w } else { 0.0 };
            cases += 1;
            if w * ind != expected {
                mismatches += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        mismatches == 0 && secs < 1.0,
        format!("{cases} steps over 729 sequences, {mismatches} mismatches, {secs:.4} s"),
    )
}

fn rel_err(fd: f64, an: f64) -> f64 {
    (fd - an).abs() / fd.abs().max(an.abs()).max(GRAD_REL_FLOOR)
}

fn random_batch(ac: &ActorCritic, rng: &mut ChaCha8Rng, n: usize) -> Minibatch {
    let d = ac.obs_dim();
    let obs = Array2::from_shape_fn((n, d), |_| rng.random_range(-1.0..1.0));
    let fwd = ac.forward_batch(obs.view()).unwrap();
    let mut actions = Array2::zeros((n, 3));
    let mut old = Array1::zeros(n);
    for i in 0..n {
        let mean: [f64; 3] = std::array::from_fn(|j| fwd.mean[[i, j]]);
        let a = ac.sample(mean, rng);
        for j in 0..3 {
            actions[[i, j]] = a[j];
        }
        old[i] = ac.log_prob(&mean, &a) + rng.random_range(-0.3..0.3);
    }
    Minibatch {
        obs,
        actions,
        old_log_probs: old,
        advantages: Array1::from_shape_fn(n, |_| rng.random_range(-2.0..2.0)),
        returns: Array1::from_shape_fn(n, |_| rng.random_range(-1.0..1.0)),
    }
}

/// Max relative error of each loss component's gradient over all params.
fn loss_gradient_errors(ac: &ActorCritic, mb: &Minibatch) -> [f64; 3] {
    let c = |value, entropy| LossCoefficients {
        clip: 0.2,
        value,
        entropy,
    };
    let (_, g_pi) = loss_and_grad(ac, mb, c(0.0, 0.0)).unwrap();
    let (_, g_pv) = loss_and_grad(ac, mb, c(1.0, 0.0)).unwrap();
    let (_, g_pe) = loss_and_grad(ac, mb, c(0.0, 1.0)).unwrap();
    let mut worst = [0.0f64; 3];
    for k in 0..ac.param_count() {
        let mut a = ac.clone();
        let mut b = ac.clone();
        a.params[k] += FD_STEP;
        b.params[k] -= FD_STEP;
        let ta = loss_and_grad(&a, mb, c(0.0, 0.0)).unwrap().0;
        let tb = loss_and_grad(&b, mb, c(0.0, 0.0)).unwrap().0;
        let fd = |x: f64, y: f64| (x - y) / (2.0 * FD_STEP);
        let analytic = [g_pi[k], g_pv[k] - g_pi[k], g_pi[k] - g_pe[k]];
        let numeric = [
            fd(ta.policy_loss, tb.policy_loss),
            fd(ta.value_loss, tb.value_loss),
            fd(ta.entropy, tb.entropy),
        ];
        for i in 0..3 {
            worst[i] = worst[i].max(rel_err(numeric[i], analytic[i]));
        }
    }
    worst
}

fn mlp_gradient_error(rng: &mut ChaCha8Rng) -> f64 {
    let shape = MlpShape::new(4, &[8], 2);
    let params: Vec<f64> = (0..shape.param_count()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let x = Array2::from_shape_fn((5, 4), |_| rng.random_range(-1.0..1.0));
    let w = Array2::from_shape_fn((5, 2), |_| rng.random_range(-1.0..1.0));
    let loss = |p: &[f64]| {
        let cache = shape.forward(p, x.view()).unwrap();
        (cache.output() * &w).sum()
    };
    let cache = shape.forward(&params, x.view()).unwrap();
    let mut grad = vec![0.0; params.len()];
    shape.backward(&params, &cache, &w, &mut grad);
    let mut worst = 0.0f64;
    for k in 0..params.len() {
        let mut a = params.clone();
        let mut b = params.clone();
        a[k] += FD_STEP;
        b[k] -= FD_STEP;
        let fd = (loss(&a) - loss(&b)) / (2.0 * FD_STEP);
        worst = worst.max(rel_err(fd, grad[k]));
    }
    worst
}

fn c2_gradients() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = [0.0f64; 4];
    for _ in 0..GRAD_TRIALS {
        let obs_dim = rng.random_range(2..=6);
        let depth = rng.random_range(1..=2);
        let hidden: Vec<usize> = (0..depth).map(|_| rng.random_range(3..=8)).collect();
        let arch = ArchitectureSpec {
            hidden,
            init_log_std: rng.random_range(-1.0..0.0),
        };
        let scale = std::array::from_fn(|_| rng.random_range(0.5..3.0));
        let mut ac = ActorCritic::new(obs_dim, &arch, scale, &mut rng);
        for p in ac.params.iter_mut() {
            *p += 0.2 * rng.random_range(-1.0..1.0);
        }
        let n = rng.random_range(4..=16);
        let mb = random_batch(&ac, &mut rng, n);
        let e = loss_gradient_errors(&ac, &mb);
        for i in 0..3 {
            worst[i] = worst[i].max(e[i]);
        }
        worst[3] = worst[3].max(mlp_gradient_error(&mut rng));
    }
    let pass = worst.iter().all(|&e| e <= GRAD_REL_TOL);
    verdict(
        pass,
        format!(
            "max rel err over {GRAD_TRIALS} trials: policy {:.2e}, value {:.2e}, entropy {:.2e}, 4-8-2 mlp {:.2e} (tol {GRAD_REL_TOL:.0e})",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
}

/// Advantage by direct summation of discounted TD errors.
fn brute_force_gae(r: &[f64], v: &[f64], boot: f64, done: &[bool], gamma: f64, lambda: f64) -> Vec<f64> {
    let n = r.len();
    let delta: Vec<f64> = (0..n)
        .map(|j| {
            let next = if j + 1 < n { v[j + 1] } else { boot };
            let cont = if done[j] { 0.0 } else { 1.0 };
            r[j] + gamma * next * cont - v[j]
        })
        .collect();
    (0..n)
        .map(|t| {
            let mut sum = 0.0;
            for (k, j) in (t..n).enumerate() {
                sum += (gamma * lambda).powi(k as i32) * delta[j];
                if done[j] {
                    break;
                }
            }
            sum
        })
        .collect()
}

fn c3_gae() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..GAE_CASES {
        let n = rng.random_range(1..=32);
        let r: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let done: Vec<bool> = (0..n).map(|_| rng.random_bool(0.15)).collect();
        let boot = rng.random_range(-5.0..5.0);
        let gamma = rng.random_range(0.9..=1.0);
        let lambda = rng.random_range(0.8..=1.0);
        let (adv, ret) = gae(&r, &v, boot, &done, gamma, lambda);
        let expected = brute_force_gae(&r, &v, boot, &done, gamma, lambda);
        for t in 0..n {
            worst = worst.max((adv[t] - expected[t]).abs());
            worst = worst.max((ret[t] - (expected[t] + v[t])).abs());
        }
    }
    verdict(
        worst <= GAE_TOL,
        format!("{GAE_CASES} episodes, max |diff| {worst:.2e} (tol {GAE_TOL:.0e})"),
    )
}

fn c4_transition() -> Verdict {
    use ModeKind::{Detach as D, Manipulate as M, Reach as R};
    let mut notes = Vec::new();
    let mut pass = true;

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_sum = 0.0f64;
    for _ in 0..200 {
        let len = rng.random_range(2..50);
        let trace: Vec<ModeKind> = (0..len).map(|_| ModeKind::ALL[rng.random_range(0..3)]).collect();
        let t = transition_matrix(&[trace]).unwrap();
        let s: f64 = t.probabilities.iter().flatten().sum();
        worst_sum = worst_sum.max((s - 1.0).abs());
    }
    pass &= worst_sum <= PROB_SUM_TOL;
    notes.push(format!("max |sum-1| {worst_sum:.1e}"));

    let t = transition_matrix(&[vec![R, R, R, M, M, D]]).unwrap();
    let expected = [(R, R, 2.0), (R, M, 1.0), (M, M, 1.0), (M, D, 1.0)];
    let mut hand = t.total() == 5;
    for from in ModeKind::ALL {
        for to in ModeKind::ALL {
            let c = expected
                .iter()
                .find(|e| e.0 == from && e.1 == to)
                .map_or(0.0, |e| e.2);
            hand &= t.probability(from, to) == c / 5.0;
        }
    }
    pass &= hand;
    notes.push(format!("hand example {}", if hand { "exact" } else { "MISMATCH" }));

    let mut rollouts = 0;
    let mut dominated = 0;
    let mut min_margin = f64::INFINITY;
    for kind in [TaskKind::SoccerStop, TaskKind::SoccerKick, TaskKind::MoveBox, TaskKind::ReachAvoid] {
        let cfg = RunConfig::paper_defaults(kind).env_config();
        for seed in 0..5 {
            let steps = common::scripted_rollout(&cfg, false, seed);
            if steps.len() < 200 {
                continue;
            }
            let trace: Vec<ModeKind> = steps.iter().map(|s| s.mode.kind).collect();
            let t = transition_matrix(&[trace]).unwrap();
            let self_mass = t.self_mass();
            rollouts += 1;
            if self_mass > 1.0 - self_mass {
                dominated += 1;
            }
            min_margin = min_margin.min(2.0 * self_mass - 1.0);
        }
    }
    let ok = rollouts > 0 && dominated == rollouts;
    pass &= ok;
    notes.push(format!(
        "self-transition dominant on {dominated}/{rollouts} rollouts >= 200 steps (min self-minus-other {min_margin:.3})"
    ));
    verdict(pass, notes.join("; "))
}

fn c5_termination() -> Verdict {
    let spec = TaskSpec::paper_defaults(TaskKind::SoccerStop);
    let bounds = DeviationBounds::default();
    let mut s = reset(&spec, 0).unwrap();
    // Measured positions at the origin make the deviation exactly −offset.
    s.robot.p = Vec2::zeros();
    s.object.as_mut().unwrap().p = Vec2::zeros();
    let base = common::reference_of(&s);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut wrong = 0;
    let mut fired = 0;
    let mut inference_fired = 0;
    for i in 0..TERMINATION_SAMPLES {
        let mut d: [f64; 4] = std::array::from_fn(|_| rng.random_range(-0.8..0.8));
        if i % 10 == 0 {
            // Exact boundary values must not fire.
            let k = rng.random_range(0..4);
            d[k] = if rng.random_bool(0.5) { 0.4 } else { -0.4 };
        }
        let mut r = base;
        r.p_robot = Vec2::new(d[0], d[1]);
        r.p_object = Vec2::new(d[2], d[3]);
        let expect = (0..4).any(|k| bounds.weights[k] * d[k].abs() > bounds.rho[k]);
        let got = matches!(check_termination(&s, &r, &bounds, true), Termination::Terminate { .. });
        fired += usize::from(got);
        if got != expect {
            wrong += 1;
        }
        if check_termination(&s, &r, &bounds, false) != Termination::Continue {
            inference_fired += 1;
        }
    }
    verdict(
        wrong == 0 && inference_fired == 0,
        format!(
            "rho {:?}: {TERMINATION_SAMPLES} samples, {fired} fired, {wrong} disagreements, {inference_fired} fired with training off",
            bounds.rho
        ),
    )
}

fn c6_physics() -> Verdict {
    let spec = TaskSpec::paper_defaults(TaskKind::SoccerStop);
    let mut rng = ChaCha8Rng::seed_from_u64(6);

    let mut increases = 0;
    let mut contacts = 0;
    let mut steps = 0;
    while steps < DRAG_STEPS {
        let mut s = reset(&spec, steps as u64).unwrap();
        s.robot.p = Vec2::new(-spec.arena_half_extents.x + 0.5, -spec.arena_half_extents.y + 0.5);
        let o = s.object.as_mut().unwrap();
        o.p = Vec2::zeros();
        let speed = rng.random_range(0.5..4.0);
        let ang: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        o.v = Vec2::new(ang.cos(), ang.sin()) * speed;
        for _ in 0..1000 {
            let ke = |s: &pogmp::world::PlanarWorldState| {
                let o = s.object.unwrap();
                0.5 * o.mass * o.v.norm_squared()
            };
            let before = ke(&s);
            let info = s.step([0.0; 3], &spec, ModeKind::Reach).unwrap();
            contacts += usize::from(info.contact);
            if ke(&s) > before {
                increases += 1;
            }
            steps += 1;
        }
    }

    let body = spec.body;
    let mut worst_p = 0.0f64;
    let mut worst_e = 0.0f64;
    let mut impacts = 0;
    while impacts < IMPACTS {
        let mut robot = RobotBody {
            p: Vec2::zeros(),
            heading: 0.0,
            v: Vec2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
            omega: 0.0,
            mass: body.robot_mass,
            inertia: body.robot_inertia,
            radius: body.robot_radius,
            u_prev: [0.0; 3],
        };
        let ang: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let n = Vec2::new(ang.cos(), ang.sin());
        let gap = body.robot_radius + body.ball_radius - rng.random_range(1e-4..0.02);
        let mut ball = ObjectBody::ball(n * gap, &body);
        ball.v = Vec2::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let vn = (ball.v - robot.v).dot(&n);
        if vn >= 0.0 {
            continue;
        }
        let pn = robot.mass * robot.v.dot(&n) + ball.mass * ball.v.dot(&n);
        let res = pogmp::world::resolve_contact(&mut robot, &mut ball);
        if !res.contact {
            return verdict(false, "constructed impact not detected");
        }
        let pn_after = robot.mass * robot.v.dot(&n) + ball.mass * ball.v.dot(&n);
        let vn_after = (ball.v - robot.v).dot(&n);
        worst_p = worst_p.max((pn_after - pn).abs());
        worst_e = worst_e.max((vn_after + ball.restitution * vn).abs());
        impacts += 1;
    }
    verdict(
        increases == 0 && contacts == 0 && worst_p <= IMPACT_TOL && worst_e <= IMPACT_TOL,
        format!(
            "{steps} drag steps: {increases} energy increases, {contacts} contacts; {IMPACTS} impacts: max momentum err {worst_p:.1e}, restitution err {worst_e:.1e} (tol {IMPACT_TOL:.0e})"
        ),
    )
}

fn c7_reward() -> Verdict {
    let cfg = RunConfig::paper_defaults(TaskKind::SoccerStop);
    let rewards = cfg.rewards;
    let s = reset(&cfg.task, 0).unwrap();
    let r = common::reference_of(&s);
    let reach_rank = cfg.oracle.build(&cfg.task).unwrap().rank(ModeKind::Reach).unwrap();
    let terms = tracking_rewards(&s, &r, &rewards)
        .merge(&object_rewards(&s, &r, &rewards, reach_rank))
        .merge(&regularization_rewards(&s.robot, [0.0; 3], [0.0; 3], &rewards));
    let base = total_reward(&terms, &rewards);
    let mut violated = terms;
    violated.set(Term::ModePreference, 1.0);
    let with_pref = total_reward(&violated, &rewards);
    let delta = with_pref - base;
    verdict(
        (base - 0.9).abs() <= REWARD_TOL && (delta + 5.0).abs() <= REWARD_TOL,
        format!("perfect reach tracking {base:.15}, preference violation adds {delta:.15} (tol {REWARD_TOL:.0e})"),
    )
}

fn c8_reach_avoid() -> Verdict {
    let mut cfg = RunConfig::paper_defaults(TaskKind::ReachAvoid);
    cfg.seed = REACH_AVOID_SEED;
    cfg.train.total_iterations = REACH_AVOID_ITERATIONS;
    let out = match train(&cfg.env_config(), &cfg.train_config(), None) {
        Ok(o) => o,
        Err(e) => return verdict(false, format!("training failed: {e}")),
    };
    let eval = evaluate(
        PolicySet::Single(&out.policy),
        &cfg.env_config(),
        EVAL_EPISODES,
        REACH_AVOID_EVAL_SEED,
        false,
    )
    .unwrap();
    let report = aggregate("single", &eval.records).unwrap();
    let collisions = eval
        .records
        .iter()
        .filter(|r| r.outcome == pogmp::world::EpisodeStatus::Failure(FailureReason::Collision))
        .count();
    verdict(
        report.success_pct >= 90.0 && collisions == 0,
        format!(
            "seed {REACH_AVOID_SEED}, {REACH_AVOID_ITERATIONS} iterations: goal arrival {:.1}% over {EVAL_EPISODES} episodes, {collisions} collisions",
            report.success_pct
        ),
    )
}

fn c9_ablation() -> Verdict {
    let mut a_ok = 0;
    let mut b_ok = 0;
    let mut c_ok = 0;
    let mut d_ok = true;
    let mut lines = Vec::new();
    for seed in SOCCER_SEEDS {
        let mut cfg = RunConfig::paper_defaults(TaskKind::SoccerStop);
        cfg.seed = seed;
        cfg.train.total_iterations = SOCCER_ITERATIONS;
        cfg.eval.episodes = EVAL_EPISODES;
        let ab = match run_ablation(&cfg, None) {
            Ok(a) => a,
            Err(e) => return verdict(false, format!("seed {seed}: {e}")),
        };
        let (Some(p), Some(np), Some(m)) = (
            ab.arm(ARM_PREFERENCE),
            ab.arm(ARM_NO_PREFERENCE),
            ab.arm(ARM_MULTI),
        ) else {
            return verdict(false, format!("seed {seed}: an arm failed"));
        };
        let t = &p.report.transition;
        let rm = t.probability(ModeKind::Reach, ModeKind::Manipulate);
        let mr = t.probability(ModeKind::Manipulate, ModeKind::Reach);
        a_ok += usize::from(rm > mr);
        b_ok += usize::from(p.report.success_pct >= np.report.success_pct);
        c_ok += usize::from(p.report.success_pct >= m.report.success_pct);
        d_ok &= m.param_count == 3 * p.param_count
            && p.env_steps == np.env_steps
            && p.env_steps == m.env_steps;
        lines.push(format!(
            "seed {seed}: success +pref {:.0}% -pref {:.0}% multi {:.0}%, P(r->m) {rm:.4} P(m->r) {mr:.4}, params {}:{}",
            p.report.success_pct, np.report.success_pct, m.report.success_pct, p.param_count, m.param_count
        ));
    }
    let n = SOCCER_SEEDS.len();
    let pass = a_ok == n && b_ok >= 2 && c_ok >= 2 && d_ok;
    lines.push(format!(
        "(a) {a_ok}/{n} (b) {b_ok}/{n} (c) {c_ok}/{n} (d) {}",
        if d_ok { "1:3, equal steps" } else { "VIOLATED" }
    ));
    verdict(pass, format!("{SOCCER_ITERATIONS} iterations per arm\n    {}", lines.join("\n    ")))
}

fn cli(args: &[&str]) -> i32 {
    pogmp::cli::run(std::iter::once("pogmp").chain(args.iter().copied()))
}

/// Contents of `files` under `dir`, `None` where unreadable.
fn snapshot(dir: &Path, files: &[&str]) -> Vec<Option<Vec<u8>>> {
    files.iter().map(|f| fs::read(dir.join(f)).ok()).collect()
}

const TRAIN_FILES: [&str; 7] = [
    "train/config.echo",
    "train/curves.csv",
    "train/report.txt",
    "train/report.json",
    "train/transition.csv",
    "train/checkpoints/final.json",
    "train/traces/episode_0000.csv",
];
const ABLATE_FILES: [&str; 9] = [
    "ablate/config.echo",
    "ablate/report.txt",
    "ablate/report.json",
    "ablate/budget.csv",
    "ablate/curves_single+pref.csv",
    "ablate/curves_single-pref.csv",
    "ablate/curves_multi-policy.csv",
    "ablate/transition_single+pref.csv",
    "ablate/transition_multi-policy.csv",
];

/// Two runs into the same directory, compared byte for byte.
fn c10_determinism() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let small = [
        "--set", "train.total_iterations=3",
        "--set", "train.n_envs=8",
        "--set", "train.n_steps=32",
        "--episodes", "10",
    ];
    let files: Vec<&str> = TRAIN_FILES.iter().chain(&ABLATE_FILES).copied().collect();
    let root = tmp.path().join("run");
    let out = root.to_str().unwrap();
    let train_out = format!("{out}/train");
    let abl_out = format!("{out}/ablate");
    let mut codes = Vec::new();
    let mut snaps = Vec::new();
    for _ in 0..2 {
        let _ = fs::remove_dir_all(&root);
        let mut args = vec!["train", "--seed", "7", "--out", &train_out];
        args.extend(small);
        codes.push(cli(&args));
        codes.push(cli(&["eval", "--checkpoint", &train_out, "--episodes", "10", "--seed", "3"]));
        let mut args = vec!["ablate", "--seed", "7", "--out", &abl_out];
        args.extend(small);
        codes.push(cli(&args));
        snaps.push(snapshot(&root, &files));
    }
    let differing: Vec<&str> = files
        .iter()
        .zip(snaps[0].iter().zip(&snaps[1]))
        .filter(|(_, (a, b))| a.is_none() || a != b)
        .map(|(f, _)| *f)
        .collect();
    verdict(
        codes.iter().all(|&c| c == 0) && differing.is_empty(),
        format!("{} files compared, exit codes {codes:?}, differing or missing {differing:?}", files.len()),
    )
}
