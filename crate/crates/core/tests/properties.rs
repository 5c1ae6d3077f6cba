use proptest::prelude::*;

use pogmp::guidance::{preference_reward, RankTrace};
use pogmp::metrics::{transition_matrix, TransitionMatrix};
use pogmp::oracle::ModeKind;
use pogmp::policy::{gae, normalize_advantages, split_budget};
use pogmp::world::{resolve_contact, BodyParams, ObjectBody, RobotBody};
use pogmp::Vec2;

fn mode() -> impl Strategy<Value = ModeKind> {
    prop::sample::select(vec![ModeKind::Reach, ModeKind::Manipulate, ModeKind::Detach])
}

proptest! {
    #[test]
    fn transition_rows_are_distributions(
        traces in prop::collection::vec(prop::collection::vec(mode(), 2..40), 1..6)
    ) {
        let t: TransitionMatrix = transition_matrix(&traces).unwrap();
        let total: f64 = t.probabilities.iter().flatten().sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
        prop_assert!(t.probabilities.iter().flatten().all(|p| (0.0..=1.0).contains(p)));
        for row in t.row_conditional() {
            let s: f64 = row.iter().sum();
            prop_assert!(s == 0.0 || (s - 1.0).abs() <= 1e-12);
        }
        let steps: usize = traces.iter().map(|t| t.len() - 1).sum();
        prop_assert_eq!(t.total(), steps as u64);
    }

    #[test]
    fn preference_fires_below_running_max(ranks in prop::collection::vec(0u32..5, 1..40)) {
        let mut trace = RankTrace::default();
        let mut max = 0;
        for (t, &r) in ranks.iter().enumerate() {
            let (ind, next) = preference_reward(trace, r);
            trace = next;
            prop_assert_eq!(ind == 1.0, t > 0 && r < max);
            max = max.max(r);
            prop_assert_eq!(trace.max_rank_so_far, Some(max));
        }
    }

    #[test]
    fn gae_with_unit_lambda_is_the_discounted_return(
        rewards in prop::collection::vec(-3.0f64..3.0, 1..30),
        boot in -5.0f64..5.0,
        gamma in 0.5f64..1.0,
    ) {
        let n = rewards.len();
        let values: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let (adv, ret) = gae(&rewards, &values, boot, &vec![false; n], gamma, 1.0);
        for t in 0..n {
            let mut g = gamma.powi((n - t) as i32) * boot;
            for (k, r) in rewards[t..].iter().enumerate() {
                g += gamma.powi(k as i32) * r;
            }
            prop_assert!((ret[t] - g).abs() < 1e-9);
            prop_assert!((adv[t] + values[t] - ret[t]).abs() < 1e-12);
        }
    }

    #[test]
    fn normalized_advantages_have_zero_mean(adv in prop::collection::vec(-10.0f64..10.0, 2..50)) {
        let mut a = adv.clone();
        normalize_advantages(&mut a);
        let mean = a.iter().sum::<f64>() / a.len() as f64;
        prop_assert!(mean.abs() < 1e-9);
        prop_assert!(a.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn budget_split_is_exact_and_even(total in 0usize..10_000, n in 1usize..8) {
        let b = split_budget(total, n);
        prop_assert_eq!(b.iter().sum::<usize>(), total);
        prop_assert!(b.iter().max().unwrap() - b.iter().min().unwrap() <= 1);
    }

    #[test]
    fn ball_impacts_conserve_normal_momentum(
        ang in 0.0f64..std::f64::consts::TAU,
        pen in 1e-4f64..0.05,
        vr in prop::array::uniform2(-3.0f64..3.0),
        vb in prop::array::uniform2(-3.0f64..3.0),
    ) {
        let body = BodyParams::default();
        let n = Vec2::new(ang.cos(), ang.sin());
        let mut robot = RobotBody {
            p: Vec2::zeros(),
            heading: 0.0,
            v: Vec2::new(vr[0], vr[1]),
            omega: 0.0,
            mass: body.robot_mass,
            inertia: body.robot_inertia,
            radius: body.robot_radius,
            u_prev: [0.0; 3],
        };
        let mut ball = ObjectBody::ball(n * (body.robot_radius + body.ball_radius - pen), &body);
        ball.v = Vec2::new(vb[0], vb[1]);
        let p0 = robot.mass * robot.v + ball.mass * ball.v;
        let res = resolve_contact(&mut robot, &mut ball);
        prop_assert!(res.contact);
        let p1 = robot.mass * robot.v + ball.mass * ball.v;
        prop_assert!((p1 - p0).norm() < 1e-9);
        // Bodies no longer approach along the normal, and overlap is removed.
        prop_assert!((ball.v - robot.v).dot(&n) >= -1e-12);
        prop_assert!((ball.p - robot.p).norm() >= body.robot_radius + body.ball_radius - 1e-12);
    }
}
