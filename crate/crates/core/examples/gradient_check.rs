//! Compare the hand-derived PPO loss gradient with central finite
//! differences on a small random network.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pogmp::policy::{loss_and_grad, ActorCritic, ArchitectureSpec, LossCoefficients, Minibatch};

fn main() -> pogmp::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let arch = ArchitectureSpec {
        hidden: vec![8, 6],
        init_log_std: -0.5,
    };
    let ac = ActorCritic::new(5, &arch, [40.0, 40.0, 10.0], &mut rng);
    let n = 16;
    let obs = Array2::from_shape_fn((n, 5), |_| rng.random_range(-1.0..1.0));
    let fwd = ac.forward_batch(obs.view())?;
    let mut actions = Array2::zeros((n, 3));
    let mut old = Array1::zeros(n);
    for i in 0..n {
        let mean = std::array::from_fn(|j| fwd.mean[[i, j]]);
        let a = ac.sample(mean, &mut rng);
        for j in 0..3 {
            actions[[i, j]] = a[j];
        }
        old[i] = ac.log_prob(&mean, &a) + rng.random_range(-0.3..0.3);
    }
    let mb = Minibatch {
        obs,
        actions,
        old_log_probs: old,
        advantages: Array1::from_shape_fn(n, |_| rng.random_range(-1.0..1.0)),
        returns: Array1::from_shape_fn(n, |_| rng.random_range(-1.0..1.0)),
    };
    let coef = LossCoefficients {
        clip: 0.2,
        value: 0.5,
        entropy: 0.005,
    };
    let (terms, grad) = loss_and_grad(&ac, &mb, coef)?;
    println!("{terms:#?}");

    let h = 1e-5;
    let mut worst = 0.0f64;
    for k in 0..ac.param_count() {
        let mut a = ac.clone();
        let mut b = ac.clone();
        a.params[k] += h;
        b.params[k] -= h;
        let fd = (loss_and_grad(&a, &mb, coef)?.0.total - loss_and_grad(&b, &mb, coef)?.0.total) / (2.0 * h);
        worst = worst.max((fd - grad[k]).abs() / fd.abs().max(grad[k].abs()).max(1e-6));
    }
    println!("{} parameters, max relative error {worst:.2e}", ac.param_count());
    Ok(())
}
