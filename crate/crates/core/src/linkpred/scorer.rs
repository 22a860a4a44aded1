use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use super::split::EvalPair;
use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::nn::loss::{logistic_loss, sigmoid};

pub const SCORER_L2: f64 = 1e-4;
pub const SCORER_TOL: f64 = 1e-6;
pub const SCORER_MAX_ITER: usize = 2000;

/// How an ordered vertex pair is turned into a feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeFeature {
    /// `[z_u ∥ z_v]`
    #[default]
    Concat,
    /// `z_u − z_v`
    Difference,
    /// `z_u ⊙ z_v`; symmetric, so it cannot separate orientations.
    Hadamard,
}

impl EdgeFeature {
    pub fn dim(self, d: usize) -> usize {
        match self {
            EdgeFeature::Concat => 2 * d,
            _ => d,
        }
    }

    pub fn build(self, zu: &ArrayView1<f64>, zv: &ArrayView1<f64>) -> Array1<f64> {
        match self {
            EdgeFeature::Concat => ndarray::concatenate![ndarray::Axis(0), *zu, *zv],
            EdgeFeature::Difference => zu - zv,
            EdgeFeature::Hadamard => zu * zv,
        }
    }
}

/// Logistic regression over edge features of endpoint coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionScorer {
    pub recipe: EdgeFeature,
    pub weights: Array1<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub grad_norm: f64,
}

fn pair_matrix(z: &ArrayView2<f64>, pairs: &[(usize, usize)], recipe: EdgeFeature) -> Array2<f64> {
    let dim = recipe.dim(z.ncols());
    let mut x = Array2::zeros((pairs.len(), dim));
    for (i, &(u, v)) in pairs.iter().enumerate() {
        x.row_mut(i).assign(&recipe.build(&z.row(u), &z.row(v)));
    }
    x
}

/// Solves `a x = b` for symmetric positive definite `a` in place.
fn cholesky_solve(mut a: Array2<f64>, b: &Array1<f64>) -> Option<Array1<f64>> {
    let n = a.nrows();
    for j in 0..n {
        let mut d = a[[j, j]];
        for k in 0..j {
            d -= a[[j, k]] * a[[j, k]];
        }
        if !(d > 0.0) {
            return None;
        }
        let d = d.sqrt();
        a[[j, j]] = d;
        for i in j + 1..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= a[[i, k]] * a[[j, k]];
            }
            a[[i, j]] = s / d;
        }
    }
    let mut y = b.clone();
    for i in 0..n {
        for k in 0..i {
            y[i] -= a[[i, k]] * y[k];
        }
        y[i] /= a[[i, i]];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] -= a[[k, i]] * y[k];
        }
        y[i] /= a[[i, i]];
    }
    Some(y)
}

/// Minimizes mean log-loss plus `½·l2·‖w‖²` by damped Newton steps with
/// backtracking, stopping when the gradient norm falls below `tol`.
pub fn fit_logistic(x: &ArrayView2<f64>, y: &ArrayView1<f64>, l2: f64, tol: f64, max_iter: usize) -> Result<(Array1<f64>, f64, usize, f64)> {
    let (n, d) = x.dim();
    let mut w = Array1::<f64>::zeros(d);
    let mut b = 0.0;
    let mut ev = logistic_loss(x, y, &w.view(), b, l2)?;
    let mut iterations = 0;
    let grad_norm = |ev: &crate::nn::loss::LogisticEval| (ev.grad_w.dot(&ev.grad_w) + ev.grad_b * ev.grad_b).sqrt();
    while iterations < max_iter && grad_norm(&ev) >= tol {
        iterations += 1;
        let logits = x.dot(&w) + b;
        let s = logits.mapv(|m| {
            let p = sigmoid(m);
            p * (1.0 - p)
        });
        // Hessian over [w, b]
        let mut h = Array2::<f64>::zeros((d + 1, d + 1));
        let xs = x.to_owned() * s.view().insert_axis(ndarray::Axis(1));
        h.slice_mut(ndarray::s![..d, ..d]).assign(&(x.t().dot(&xs) / n as f64));
        let col = xs.sum_axis(ndarray::Axis(0)) / n as f64;
        h.slice_mut(ndarray::s![..d, d]).assign(&col);
        h.slice_mut(ndarray::s![d, ..d]).assign(&col);
        h[[d, d]] = s.sum() / n as f64;
        for i in 0..d {
            h[[i, i]] += l2;
        }
        let mut g = Array1::<f64>::zeros(d + 1);
        g.slice_mut(ndarray::s![..d]).assign(&ev.grad_w);
        g[d] = ev.grad_b;
        let mut damping = 1e-10;
        let step = loop {
            let mut hd = h.clone();
            for i in 0..=d {
                hd[[i, i]] += damping;
            }
            if let Some(step) = cholesky_solve(hd, &g) {
                break step;
            }
            damping *= 100.0;
            if damping > 1e6 {
                return Err(Error::Undefined("logistic Hessian is not positive definite".into()));
            }
        };
        let mut t = 1.0;
        let slope = g.dot(&step);
        loop {
            let w_new = &w - &(step.slice(ndarray::s![..d]).to_owned() * t);
            let b_new = b - t * step[d];
            let ev_new = logistic_loss(x, y, &w_new.view(), b_new, l2)?;
            if ev_new.loss <= ev.loss - 1e-4 * t * slope || t < 1e-10 {
                w = w_new;
                b = b_new;
                ev = ev_new;
                break;
            }
            t *= 0.5;
        }
    }
    let gn = grad_norm(&ev);
    Ok((w, b, iterations, gn))
}

impl DirectionScorer {
    /// Fits on the edges of `train_graph` (positives) and their reversals
    /// (negatives). Rows of `z` are per-vertex Euclidean coordinates, e.g.
    /// `log_0` of hyperbolic embeddings.
    pub fn fit(z: &ArrayView2<f64>, train_graph: &DirectedGraph, recipe: EdgeFeature) -> Result<Self> {
        if train_graph.n_edges() == 0 {
            return Err(Error::Empty("direction scorer needs training edges".into()));
        }
        if z.nrows() < train_graph.n_vertices() {
            return Err(Error::Dimension(format!(
                "{} embedding rows for {} vertices",
                z.nrows(),
                train_graph.n_vertices()
            )));
        }
        let mut pairs = Vec::with_capacity(2 * train_graph.n_edges());
        let mut labels = Vec::with_capacity(2 * train_graph.n_edges());
        for e in train_graph.edges() {
            pairs.push((e.src, e.dst));
            labels.push(1.0);
            pairs.push((e.dst, e.src));
            labels.push(0.0);
        }
        let x = pair_matrix(z, &pairs, recipe);
        let y = Array1::from(labels);
        let (weights, bias, iterations, grad_norm) =
            fit_logistic(&x.view(), &y.view(), SCORER_L2, SCORER_TOL, SCORER_MAX_ITER)?;
        Ok(Self {
            recipe,
            weights,
            bias,
            iterations,
            grad_norm,
        })
    }

    /// Probability that `u -> v` is the true orientation.
    pub fn score(&self, z: &ArrayView2<f64>, u: usize, v: usize) -> f64 {
        let f = self.recipe.build(&z.row(u), &z.row(v));
        sigmoid(f.dot(&self.weights) + self.bias)
    }

    pub fn score_pairs(&self, z: &ArrayView2<f64>, pairs: &[EvalPair]) -> Vec<f64> {
        pairs.iter().map(|p| self.score(z, p.src, p.dst)).collect()
    }

    /// Fraction of edges of `g` (and their reversals) classified correctly.
    pub fn accuracy(&self, z: &ArrayView2<f64>, g: &DirectedGraph) -> f64 {
        let mut correct = 0usize;
        for e in g.edges() {
            correct += usize::from(self.score(z, e.src, e.dst) > 0.5);
            correct += usize::from(self.score(z, e.dst, e.src) < 0.5);
        }
        correct as f64 / (2 * g.n_edges()).max(1) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn cholesky_solves() {
        let a = array![[4.0, 2.0, 0.4], [2.0, 5.0, 1.0], [0.4, 1.0, 3.0]];
        let b = array![1.0, -2.0, 0.5];
        let x = cholesky_solve(a.clone(), &b).unwrap();
        assert!((a.dot(&x) - b).iter().all(|d| d.abs() < 1e-12));
        assert!(cholesky_solve(array![[1.0, 2.0], [2.0, 1.0]], &array![1.0, 1.0]).is_none());
    }

    #[test]
    fn newton_reaches_stationarity() {
        let x = array![[0.0, 1.0], [1.0, 0.3], [2.0, -1.0], [3.0, 0.2], [1.5, 0.0], [0.5, 0.5]];
        let y = array![0.0, 0.0, 1.0, 1.0, 1.0, 0.0];
        let (w, b, iters, gn) = fit_logistic(&x.view(), &y.view(), 1e-4, 1e-10, 100).unwrap();
        assert!(gn < 1e-10 && iters < 100);
        let ev = logistic_loss(&x.view(), &y.view(), &w.view(), b, 1e-4).unwrap();
        assert!(ev.grad_w.iter().all(|g| g.abs() < 1e-10));
    }

    #[test]
    fn depth_coordinate_separates_directions() {
        // chain of depth levels; edges point from depth k to k+1
        let depth = [0.0, 1.0, 1.0, 2.0, 2.0, 3.0];
        let g = DirectedGraph::from_pairs(6, &[(0, 1), (0, 2), (1, 3), (2, 4), (3, 5), (4, 5)]);
        let z = Array2::from_shape_fn((6, 2), |(v, k)| if k == 0 { depth[v] } else { 0.3 });
        let s = DirectionScorer::fit(&z.view(), &g, EdgeFeature::Concat).unwrap();
        assert!(s.accuracy(&z.view(), &g) > 0.95);
        assert!(s.score(&z.view(), 0, 1) > 0.5 && s.score(&z.view(), 1, 0) < 0.5);
    }

    #[test]
    fn identical_embeddings_carry_no_signal() {
        let g = DirectedGraph::from_pairs(4, &[(0, 1), (1, 2), (2, 3)]);
        let z = Array2::from_elem((4, 3), 0.7);
        let s = DirectionScorer::fit(&z.view(), &g, EdgeFeature::Concat).unwrap();
        for e in g.edges() {
            assert!((s.score(&z.view(), e.src, e.dst) - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn empty_training_graph_is_an_error() {
        let g = DirectedGraph::from_pairs(3, &[]);
        let z = Array2::zeros((3, 2));
        assert!(DirectionScorer::fit(&z.view(), &g, EdgeFeature::Concat).is_err());
    }
}
