#![allow(dead_code)]

pub mod oracles;

use dsae_core::nn::gradcheck::{check_tape, numeric_gradient, relative_error, DEFAULT_STEP};
use dsae_core::nn::loss::{logistic_loss, mse, supervised_contrastive};
use dsae_core::nn::{Activation, DenseLayer, ParameterSet};
use dsae_core::DirectedGraph;
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.gen_range(-scale..scale))
}

/// Random directed graph on `n` vertices with edge probability `p`.
pub fn random_digraph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> DirectedGraph {
    let mut pairs = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.gen_bool(p) {
                pairs.push((u, v));
            }
        }
    }
    DirectedGraph::from_pairs(n, &pairs)
}

/// Rows scaled so that `‖x‖√c` is uniform in `(0.05, max_radius)`.
pub fn ball_batch(rng: &mut ChaCha8Rng, rows: usize, cols: usize, c: f64, max_radius: f64) -> Array2<f64> {
    let mut x = uniform(rng, rows, cols, 1.0);
    for mut r in x.rows_mut() {
        let n = r.dot(&r).sqrt().max(1e-12);
        let target = rng.gen_range(0.05..max_radius) / c.sqrt();
        r.mapv_inplace(|v| v * target / n);
    }
    x
}

fn layer_with(w: Array2<f64>, b: Array2<f64>, act: Activation) -> (DenseLayer, ParameterSet) {
    let mut p = ParameterSet::new();
    let (input, output) = w.dim();
    let weight = p.add("w", w);
    let bias = p.add("b", b);
    (
        DenseLayer {
            input,
            output,
            activation: act,
            weight,
            bias,
        },
        p,
    )
}

/// Dense layer on a random 5x4 batch; downstream scalar is `Σ y ⊙ R`.
pub fn audit_dense(seed: u64, act: Activation) -> f64 {
    let mut r = rng(seed);
    let x = uniform(&mut r, 5, 4, 1.0);
    let w = uniform(&mut r, 4, 3, 1.0);
    let b = uniform(&mut r, 1, 3, 0.5);
    let probe = uniform(&mut r, 5, 3, 1.0);
    check_tape(
        |t, v| {
            let (layer, _) = layer_with(Array2::zeros((4, 3)), Array2::zeros((1, 3)), act);
            let y = layer.forward(t, &[v[1], v[2]], v[0]).unwrap();
            let y = t.mask_mul(y, probe.clone());
            t.sum_all(y)
        },
        &[x, w, b],
        DEFAULT_STEP,
    )
}

pub fn audit_hyperbolic_dense(seed: u64, act: Activation) -> f64 {
    let mut r = rng(seed);
    let c = r.gen_range(0.3..2.0);
    let x = ball_batch(&mut r, 5, 4, c, 0.9);
    let w = uniform(&mut r, 4, 3, 0.8);
    let b = uniform(&mut r, 1, 3, 0.3);
    let probe = uniform(&mut r, 5, 3, 1.0);
    check_tape(
        |t, v| {
            let (layer, _) = layer_with(Array2::zeros((4, 3)), Array2::zeros((1, 3)), act);
            let y = layer.forward_hyperbolic(t, &[v[1], v[2]], v[0], c).unwrap();
            let y = t.mask_mul(y, probe.clone());
            t.sum_all(y)
        },
        &[x, w, b],
        DEFAULT_STEP,
    )
}

pub fn audit_mse(seed: u64) -> f64 {
    let mut r = rng(seed);
    let a = uniform(&mut r, 5, 4, 2.0);
    let b = uniform(&mut r, 5, 4, 2.0);
    check_tape(|t, v| mse(t, v[0], v[1]), &[a, b], DEFAULT_STEP)
}

pub fn audit_contrastive(seed: u64) -> f64 {
    let mut r = rng(seed);
    let n = 6;
    let emb = uniform(&mut r, n, 4, 1.0);
    let mut labels: Vec<usize> = (0..n).map(|_| r.gen_range(0..3)).collect();
    labels[1] = labels[0];
    let tau = r.gen_range(0.2..1.0);
    check_tape(
        |t, v| supervised_contrastive(t, v[0], &labels, tau).unwrap(),
        &[emb],
        DEFAULT_STEP,
    )
}

pub fn audit_logistic(seed: u64) -> f64 {
    let mut r = rng(seed);
    let x = uniform(&mut r, 12, 5, 1.5);
    let y = Array1::from_shape_fn(12, |_| if r.gen_bool(0.5) { 1.0 } else { 0.0 });
    let w = uniform(&mut r, 1, 5, 1.0);
    let b = uniform(&mut r, 1, 1, 1.0);
    let ev = logistic_loss(&x.view(), &y.view(), &w.row(0), b[[0, 0]], 1e-4).unwrap();
    let analytic = vec![ev.grad_w.insert_axis(ndarray::Axis(0)), Array2::from_elem((1, 1), ev.grad_b)];
    let numeric = numeric_gradient(
        |p| {
            logistic_loss(&x.view(), &y.view(), &p[0].row(0), p[1][[0, 0]], 1e-4)
                .unwrap()
                .loss
        },
        &[w, b],
        DEFAULT_STEP,
    );
    relative_error(&analytic, &numeric)
}

/// Worst relative error of each audited component over `instances` seeds.
pub fn gradient_audit(instances: u64) -> Vec<(&'static str, f64)> {
    let worst = |f: &dyn Fn(u64) -> f64| (0..instances).map(f).fold(0.0f64, f64::max);
    vec![
        ("dense tanh", worst(&|s| audit_dense(s, Activation::Tanh))),
        ("dense relu", worst(&|s| audit_dense(s, Activation::Relu))),
        ("dense identity", worst(&|s| audit_dense(s, Activation::Identity))),
        ("hyperbolic dense tanh", worst(&|s| audit_hyperbolic_dense(s, Activation::Tanh))),
        ("hyperbolic dense relu", worst(&|s| audit_hyperbolic_dense(s, Activation::Relu))),
        ("hyperbolic dense identity", worst(&|s| audit_hyperbolic_dense(s, Activation::Identity))),
        ("mse", worst(&|s| audit_mse(s))),
        ("logistic", worst(&|s| audit_logistic(s))),
        ("supervised contrastive", worst(&|s| audit_contrastive(s))),
    ]
}
