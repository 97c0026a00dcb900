//! Oracles shared by the integration tests. They deliberately avoid the
//! library code paths they check: gradients come from finite differences of
//! the forward pass, cross-validation from a direct loop, and so on.
#![allow(dead_code)]

use lasml::mlp::{Activation, Network};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-scale..scale))
}

/// Batch MSE averaged over every entry, straight from the forward pass.
pub fn batch_mse(net: &Network, x: &Array2<f64>, y: &Array2<f64>) -> f64 {
    let out = net.forward(x.view()).unwrap();
    (&out - y).mapv(|r| r * r).mean().unwrap()
}

/// Central finite differences of `batch_mse` over the flattened parameters.
pub fn finite_difference_gradient(net: &Network, x: &Array2<f64>, y: &Array2<f64>, eps: f64) -> Vec<f64> {
    let base = net.flatten();
    let mut probe = net.clone();
    (0..base.len())
        .map(|i| {
            let mut p = base.clone();
            p[i] = base[i] + eps;
            probe.set_flat(&p).unwrap();
            let up = batch_mse(&probe, x, y);
            p[i] = base[i] - eps;
            probe.set_flat(&p).unwrap();
            let down = batch_mse(&probe, x, y);
            (up - down) / (2.0 * eps)
        })
        .collect()
}

/// Largest `|a − f| / max(|a|, |f|, floor)` over all parameters.
pub fn max_relative_deviation(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, f)| (a - f).abs() / a.abs().max(f.abs()).max(floor))
        .fold(0.0, f64::max)
}

/// One random (network, batch) pair for the gradient check.
pub fn random_case(seed: u64, hidden: Activation) -> (Network, Array2<f64>, Array2<f64>) {
    let mut r = rng(seed);
    let inputs = r.random_range(1..=5);
    let depth = r.random_range(1..=2);
    let mut sizes = vec![inputs];
    for _ in 0..depth {
        sizes.push(r.random_range(2..=6));
    }
    sizes.push(r.random_range(1..=3));
    let output = if r.random_bool(0.5) { Activation::Identity } else { hidden };
    let mut net = Network::init(&sizes, hidden, output, &mut r).unwrap();
    // Random biases too: with zero biases a dead relu layer feeds exact
    // zeros forward and the next pre-activation sits on the kink.
    let params: Vec<f64> = (0..net.flatten().len()).map(|_| r.random_range(-1.0..1.0)).collect();
    net.set_flat(&params).unwrap();
    let batch = r.random_range(1..=8);
    let x = random_matrix(&mut r, batch, inputs, 1.0);
    let y = random_matrix(&mut r, batch, *sizes.last().unwrap(), 1.0);
    (net, x, y)
}

/// Maximum relative deviation between backprop and finite differences over
/// 20 cases that cycle through the five activations.
pub fn gradient_check_20() -> f64 {
    (0..20u64)
        .map(|i| {
            let act = Activation::ALL[i as usize % Activation::ALL.len()];
            let (net, x, y) = random_case(1000 + i, act);
            let (grads, _) = net.mse_gradient(x.view(), y.view()).unwrap();
            let numeric = finite_difference_gradient(&net, &x, &y, 1e-5);
            max_relative_deviation(&grads.flatten(), &numeric, 1e-7)
        })
        .fold(0.0, f64::max)
}
