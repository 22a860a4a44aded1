//! Central finite-difference gradient auditing.

use ndarray::Array2;

use super::tape::{Tape, Var};

pub const DEFAULT_STEP: f64 = 1e-5;

/// `‖a − n‖ / max(‖a‖, ‖n‖, 1e-8)` over all tensors jointly.
pub fn relative_error(analytic: &[Array2<f64>], numeric: &[Array2<f64>]) -> f64 {
    let mut diff = 0.0;
    let mut na = 0.0;
    let mut nn = 0.0;
    for (a, n) in analytic.iter().zip(numeric) {
        for (x, y) in a.iter().zip(n.iter()) {
            diff += (x - y) * (x - y);
            na += x * x;
            nn += y * y;
        }
    }
    diff.sqrt() / na.sqrt().max(nn.sqrt()).max(1e-8)
}

/// Central-difference gradient of `f` with respect to every entry of `inputs`.
pub fn numeric_gradient<F>(mut f: F, inputs: &[Array2<f64>], h: f64) -> Vec<Array2<f64>>
where
    F: FnMut(&[Array2<f64>]) -> f64,
{
    let mut work: Vec<Array2<f64>> = inputs.to_vec();
    let mut out = Vec::with_capacity(inputs.len());
    for k in 0..inputs.len() {
        let mut g = Array2::zeros(inputs[k].raw_dim());
        for idx in 0..inputs[k].len() {
            let (r, c) = (idx / inputs[k].ncols(), idx % inputs[k].ncols());
            let orig = work[k][[r, c]];
            work[k][[r, c]] = orig + h;
            let up = f(&work);
            work[k][[r, c]] = orig - h;
            let down = f(&work);
            work[k][[r, c]] = orig;
            g[[r, c]] = (up - down) / (2.0 * h);
        }
        out.push(g);
    }
    out
}

/// Builds the scalar graph `build` on fresh tapes and compares its reverse-mode
/// gradient against central differences. Returns the relative error.
pub fn check_tape<F>(build: F, inputs: &[Array2<f64>], h: f64) -> f64
where
    F: Fn(&mut Tape, &[Var]) -> Var,
{
    let mut t = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|x| t.leaf(x.clone())).collect();
    let out = build(&mut t, &vars);
    let grads = t.backward(out);
    let analytic: Vec<Array2<f64>> = vars.iter().map(|&v| grads.wrt(v)).collect();
    let numeric = numeric_gradient(
        |xs| {
            let mut t = Tape::new();
            let vars: Vec<Var> = xs.iter().map(|x| t.leaf(x.clone())).collect();
            let out = build(&mut t, &vars);
            t.scalar(out)
        },
        inputs,
        h,
    );
    relative_error(&analytic, &numeric)
}
