//! Row-wise Poincaré-ball maps recorded on a [`Tape`].
//!
//! Each row of an `n x d` node is one point. These mirror the functions in
//! [`crate::hyperbolic`] and must agree with them numerically.

use super::tape::{Tape, Var};
use crate::hyperbolic::{max_norm, BALL_EPS};

/// Squared norms below this are clamped before the square root so the
/// origin has a finite (zero) gradient.
const MIN_SQ_NORM: f64 = 1e-30;

/// Row norms as an `n x 1` column.
pub fn row_norm(t: &mut Tape, x: Var) -> Var {
    let sq = t.mul(x, x);
    let s = t.row_sum(sq);
    let s = t.max_const(s, MIN_SQ_NORM);
    t.sqrt(s)
}

/// Rescales rows that leave the shrunk ball back onto its boundary.
pub fn project(t: &mut Tape, x: Var, c: f64) -> Var {
    let n = row_norm(t, x);
    let capped = t.min_const(n, max_norm(c));
    let inv = t.recip(n);
    let scale = t.mul(capped, inv);
    t.mul_col(x, scale)
}

pub fn exp0(t: &mut Tape, v: Var, c: f64) -> Var {
    let sc = c.sqrt();
    let n = row_norm(t, v);
    let arg = t.scale(n, sc);
    let th = t.tanh(arg);
    let inv = t.recip(arg);
    let factor = t.mul(th, inv);
    let y = t.mul_col(v, factor);
    project(t, y, c)
}

pub fn log0(t: &mut Tape, y: Var, c: f64) -> Var {
    let sc = c.sqrt();
    let n = row_norm(t, y);
    let arg = t.scale(n, sc);
    let r = t.min_const(arg, 1.0 - BALL_EPS);
    let at = t.atanh(r);
    let inv = t.recip(arg);
    let factor = t.mul(at, inv);
    t.mul_col(y, factor)
}

/// Row-wise `x ⊕_c y` for two `n x d` nodes.
pub fn mobius_add(t: &mut Tape, x: Var, y: Var, c: f64) -> Var {
    let xy_prod = t.mul(x, y);
    let xy = t.row_sum(xy_prod);
    let xx_prod = t.mul(x, x);
    let x2 = t.row_sum(xx_prod);
    let yy_prod = t.mul(y, y);
    let y2 = t.row_sum(yy_prod);

    let two_c_xy = t.scale(xy, 2.0 * c);
    let c_y2 = t.scale(y2, c);
    let s = t.add(two_c_xy, c_y2);
    let coef_x = t.affine(s, 1.0, 1.0);
    let coef_y = t.affine(x2, -c, 1.0);

    let x2y2 = t.mul(x2, y2);
    let c2_x2y2 = t.scale(x2y2, c * c);
    let d = t.add(two_c_xy, c2_x2y2);
    let den = t.affine(d, 1.0, 1.0);

    let ax = t.mul_col(x, coef_x);
    let by = t.mul_col(y, coef_y);
    let num = t.add(ax, by);
    let inv = t.recip(den);
    let out = t.mul_col(num, inv);
    project(t, out, c)
}

/// Row-wise `W ⊗_c x = exp_0(log_0(x) W)` with `W` stored `d_in x d_out`.
pub fn mobius_matvec(t: &mut Tape, x: Var, w: Var, c: f64) -> Var {
    let u = log0(t, x, c);
    let m = t.matmul(u, w);
    exp0(t, m, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperbolic;
    use ndarray::{array, Array1, Array2};

    fn close(a: &Array2<f64>, b: &Array2<f64>, tol: f64) -> bool {
        a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn agrees_with_pointwise_maps() {
        let c = 0.7;
        let x = array![[0.3, -0.2, 0.1], [0.0, 0.0, 0.0], [0.5, 0.4, -0.6]];
        let y = array![[-0.1, 0.3, 0.2], [0.2, 0.1, 0.0], [0.1, -0.7, 0.3]];
        let w = array![[0.5, -1.0], [0.3, 0.2], [-0.4, 0.8]];
        let mut t = Tape::new();
        let xv = t.leaf(x.clone());
        let yv = t.leaf(y.clone());
        let wv = t.leaf(w.clone());
        let e = exp0(&mut t, xv, c);
        let l = log0(&mut t, yv, c);
        let a = mobius_add(&mut t, xv, yv, c);
        let m = mobius_matvec(&mut t, xv, wv, c);
        for r in 0..3 {
            let xr = x.row(r);
            let yr = y.row(r);
            let want_e = hyperbolic::exp0_raw(&xr, c);
            let want_l = hyperbolic::log0_raw(&yr, c);
            let want_a = hyperbolic::mobius_add_raw(&xr, &yr, c);
            let want_m = hyperbolic::exp0_raw(&w.t().dot(&hyperbolic::log0_raw(&xr, c)).view(), c);
            let row = |v: Var| t.value(v).row(r).to_owned();
            let near = |a: Array1<f64>, b: Array1<f64>| (a - b).iter().all(|d| d.abs() < 1e-13);
            assert!(near(row(e), want_e));
            assert!(near(row(l), want_l));
            assert!(near(row(a), want_a));
            assert!(near(row(m), want_m));
        }
    }

    #[test]
    fn exp_then_log_is_identity_inside() {
        let v = array![[0.3, 0.1], [-1.0, 0.5]];
        let mut t = Tape::new();
        let x = t.leaf(v.clone());
        let e = exp0(&mut t, x, 1.0);
        let l = log0(&mut t, e, 1.0);
        assert!(close(t.value(l), &v, 1e-12));
    }
}
