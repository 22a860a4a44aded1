//! Poincaré ball of curvature `-c`: maps at the origin, Möbius operations
//! and the geodesic distance.
//!
//! Every operation projects its output into the ball of radius
//! `(1 - BALL_EPS) / sqrt(c)`.

use ndarray::{Array1, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

pub const BALL_EPS: f64 = 1e-5;

/// Below this norm a vector is treated as the origin.
const MIN_NORM: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct BallPoint {
    pub coords: Array1<f64>,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector(pub Array1<f64>);

fn norm(x: &ArrayView1<f64>) -> f64 {
    x.dot(x).sqrt()
}

fn check_curvature(c: f64) -> Result<()> {
    if c.is_finite() && c > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("curvature must be > 0, got {c}")))
    }
}

/// Largest admissible Euclidean norm inside the ball.
pub fn max_norm(c: f64) -> f64 {
    (1.0 - BALL_EPS) / c.sqrt()
}

/// Rescales `x` onto the shrunk ball if it lies outside it.
pub fn project(x: Array1<f64>, c: f64) -> Array1<f64> {
    let n = norm(&x.view());
    let limit = max_norm(c);
    if n > limit {
        x * (limit / n)
    } else {
        x
    }
}

impl BallPoint {
    /// Wraps coordinates that must already lie strictly inside the ball.
    pub fn new(coords: Array1<f64>, c: f64) -> Result<Self> {
        check_curvature(c)?;
        let r = c.sqrt() * norm(&coords.view());
        if !(r < 1.0) {
            return Err(Error::OutsideBall(r));
        }
        Ok(Self { coords, c })
    }

    pub fn origin(dim: usize, c: f64) -> Self {
        Self {
            coords: Array1::zeros(dim),
            c,
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.coords.view())
    }

    fn same_ball(&self, other: &BallPoint) -> Result<()> {
        if self.c != other.c {
            return Err(Error::CurvatureMismatch(self.c, other.c));
        }
        if self.dim() != other.dim() {
            return Err(Error::Dimension(format!("{} vs {}", self.dim(), other.dim())));
        }
        Ok(())
    }
}

/// `exp_0^c(v) = tanh(sqrt(c)|v|) v / (sqrt(c)|v|)`.
pub fn exp0(v: &TangentVector, c: f64) -> Result<BallPoint> {
    check_curvature(c)?;
    Ok(BallPoint {
        coords: exp0_raw(&v.0.view(), c),
        c,
    })
}

pub(crate) fn exp0_raw(v: &ArrayView1<f64>, c: f64) -> Array1<f64> {
    let n = norm(v);
    if n < MIN_NORM {
        return Array1::zeros(v.len());
    }
    let sc = c.sqrt();
    project(v.to_owned() * ((sc * n).tanh() / (sc * n)), c)
}

/// `log_0^c(y) = artanh(sqrt(c)|y|) y / (sqrt(c)|y|)`.
pub fn log0(y: &BallPoint) -> Result<TangentVector> {
    let sc = y.c.sqrt();
    let n = y.norm();
    if !(sc * n < 1.0) {
        return Err(Error::OutsideBall(sc * n));
    }
    Ok(TangentVector(log0_raw(&y.coords.view(), y.c)))
}

pub(crate) fn log0_raw(y: &ArrayView1<f64>, c: f64) -> Array1<f64> {
    let n = norm(y);
    if n < MIN_NORM {
        return Array1::zeros(y.len());
    }
    let sc = c.sqrt();
    let r = (sc * n).min(1.0 - BALL_EPS);
    y.to_owned() * (r.atanh() / (sc * n))
}

/// Möbius addition `x ⊕_c y`.
pub fn mobius_add(x: &BallPoint, y: &BallPoint) -> Result<BallPoint> {
    x.same_ball(y)?;
    Ok(BallPoint {
        coords: mobius_add_raw(&x.coords.view(), &y.coords.view(), x.c),
        c: x.c,
    })
}

pub(crate) fn mobius_add_raw(x: &ArrayView1<f64>, y: &ArrayView1<f64>, c: f64) -> Array1<f64> {
    let xy = x.dot(y);
    let x2 = x.dot(x);
    let y2 = y.dot(y);
    let num_x = 1.0 + 2.0 * c * xy + c * y2;
    let num_y = 1.0 - c * x2;
    let den = 1.0 + 2.0 * c * xy + c * c * x2 * y2;
    let out = (x.to_owned() * num_x + y.to_owned() * num_y) / den.max(MIN_NORM);
    project(out, c)
}

/// Möbius matrix-vector product `W ⊗_c x = exp_0(W log_0(x))` for an
/// `m x d` matrix `W`.
pub fn mobius_matvec(w: &ArrayView2<f64>, x: &BallPoint) -> Result<BallPoint> {
    if w.ncols() != x.dim() {
        return Err(Error::Dimension(format!(
            "{}x{} matrix applied to a {}-vector",
            w.nrows(),
            w.ncols(),
            x.dim()
        )));
    }
    let u = log0(x)?;
    let m = w.dot(&u.0);
    if norm(&m.view()) < MIN_NORM {
        return Ok(BallPoint::origin(w.nrows(), x.c));
    }
    exp0(&TangentVector(m), x.c)
}

/// Geodesic distance `(2/sqrt(c)) artanh(sqrt(c) |(-x) ⊕_c y|)`.
pub fn poincare_dist(x: &BallPoint, y: &BallPoint) -> Result<f64> {
    x.same_ball(y)?;
    Ok(poincare_dist_raw(&x.coords.view(), &y.coords.view(), x.c))
}

pub(crate) fn poincare_dist_raw(x: &ArrayView1<f64>, y: &ArrayView1<f64>, c: f64) -> f64 {
    if x == y {
        return 0.0;
    }
    let neg = x.mapv(|v| -v);
    let diff = mobius_add_unprojected(&neg.view(), y, c);
    let sc = c.sqrt();
    let r = (sc * norm(&diff.view())).min(1.0 - f64::EPSILON);
    2.0 / sc * r.atanh()
}

fn mobius_add_unprojected(x: &ArrayView1<f64>, y: &ArrayView1<f64>, c: f64) -> Array1<f64> {
    let xy = x.dot(y);
    let x2 = x.dot(x);
    let y2 = y.dot(y);
    let den = 1.0 + 2.0 * c * xy + c * c * x2 * y2;
    (x.to_owned() * (1.0 + 2.0 * c * xy + c * y2) + y.to_owned() * (1.0 - c * x2)) / den
}
