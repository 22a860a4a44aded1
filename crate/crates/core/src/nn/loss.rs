use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use super::ball::row_norm;
use super::tape::{Tape, Var};
use crate::error::{Error, Result};

/// `Σ ‖a_i − b_i‖²` over all rows.
pub fn mse(t: &mut Tape, a: Var, b: Var) -> Var {
    let d = t.sub(a, b);
    let sq = t.mul(d, d);
    t.sum_all(sq)
}

/// Supervised contrastive loss summed over anchors. Rows are ℓ₂-normalized
/// first; anchors without a same-label partner are skipped.
pub fn supervised_contrastive(t: &mut Tape, emb: Var, labels: &[usize], tau: f64) -> Result<Var> {
    let n = t.value(emb).nrows();
    if labels.len() != n {
        return Err(Error::Dimension(format!("{} labels for {n} embeddings", labels.len())));
    }
    if n < 2 {
        return Err(Error::InvalidArgument("contrastive loss needs at least 2 points".into()));
    }
    if !(tau > 0.0) {
        return Err(Error::InvalidArgument(format!("temperature must be positive, got {tau}")));
    }
    let mut pos_weight = Array2::<f64>::zeros((n, n));
    let mut anchors = Array2::<f64>::zeros((n, 1));
    for i in 0..n {
        let pos: Vec<usize> = (0..n).filter(|&p| p != i && labels[p] == labels[i]).collect();
        if pos.is_empty() {
            continue;
        }
        anchors[[i, 0]] = 1.0;
        for p in pos.iter() {
            pos_weight[[i, *p]] = 1.0 / pos.len() as f64;
        }
    }
    if anchors.sum() == 0.0 {
        return Err(Error::InvalidArgument("all labels distinct: no positive pairs".into()));
    }
    let off_diag = Array2::from_shape_fn((n, n), |(i, j)| if i == j { 0.0 } else { 1.0 });

    let norms = row_norm(t, emb);
    let inv = t.recip(norms);
    let z = t.mul_col(emb, inv);
    let zt = t.transpose(z);
    let gram = t.matmul(z, zt);
    let sim = t.scale(gram, 1.0 / tau);
    // cosine similarity is at most 1, so shifting by 1/τ keeps exp bounded
    let shifted = t.affine(sim, 1.0, -1.0 / tau);
    let e = t.exp(shifted);
    let e = t.mask_mul(e, off_diag);
    let den = t.row_sum(e);
    let log_den = t.log(den);
    let log_den = t.affine(log_den, 1.0, 1.0 / tau);
    let log_den = t.mask_mul(log_den, anchors);
    let den_total = t.sum_all(log_den);
    let pos = t.mask_mul(sim, pos_weight);
    let pos_total = t.sum_all(pos);
    Ok(t.sub(den_total, pos_total))
}

/// Value and gradient of an L2-penalized logistic regression objective.
#[derive(Debug, Clone)]
pub struct LogisticEval {
    pub loss: f64,
    pub grad_w: Array1<f64>,
    pub grad_b: f64,
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Mean log-loss of `σ(x·w + b)` against 0/1 labels plus `½·l2·‖w‖²`.
/// The bias is not penalized.
pub fn logistic_loss(
    x: &ArrayView2<f64>,
    y: &ArrayView1<f64>,
    w: &ArrayView1<f64>,
    b: f64,
    l2: f64,
) -> Result<LogisticEval> {
    let (n, d) = x.dim();
    if y.len() != n || w.len() != d {
        return Err(Error::Dimension(format!(
            "logistic loss: x {n}x{d}, y {}, w {}",
            y.len(),
            w.len()
        )));
    }
    if n == 0 {
        return Err(Error::Empty("logistic loss on zero samples".into()));
    }
    let logits = x.dot(w) + b;
    let mut loss = 0.0;
    let mut resid = Array1::<f64>::zeros(n);
    for i in 0..n {
        let m = logits[i];
        loss += y[i] * softplus(-m) + (1.0 - y[i]) * softplus(m);
        resid[i] = sigmoid(m) - y[i];
    }
    let nf = n as f64;
    loss = loss / nf + 0.5 * l2 * w.dot(w);
    let grad_w = x.t().dot(&resid) / nf + &(w.to_owned() * l2);
    let grad_b = resid.sum() / nf;
    Ok(LogisticEval { loss, grad_w, grad_b })
}
