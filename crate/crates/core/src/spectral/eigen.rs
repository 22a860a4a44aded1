//! Dense complex Hermitian eigensolver.
//!
//! Householder reduction to Hermitian tridiagonal form, a diagonal unitary
//! similarity making the off-diagonal real and nonnegative, then implicit QL
//! with Wilkinson shifts on the real symmetric tridiagonal matrix.

use ndarray::{s, Array1, Array2, Axis};
use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest entrywise deviation `|m[i,j] - conj(m[j,i])|`.
pub fn hermitian_deviation(m: &Array2<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns) of a
/// Hermitian matrix. Fails if `m` is not square or deviates from
/// Hermitian symmetry by more than `1e-10`.
pub fn hermitian_eigen(m: &Array2<Complex64>) -> Result<(Array1<f64>, Array2<Complex64>)> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::Dimension(format!("{}x{} matrix is not square", n, m.ncols())));
    }
    let dev = hermitian_deviation(m);
    if dev > 1e-10 {
        return Err(Error::NotHermitian(dev));
    }
    if n == 0 {
        return Ok((Array1::zeros(0), Array2::zeros((0, 0))));
    }

    let mut a = m.clone();
    // exact Hermitian symmetry from the lower triangle
    for i in 0..n {
        a[[i, i]] = Complex64::new(a[[i, i]].re, 0.0);
        for j in 0..i {
            a[[j, i]] = a[[i, j]].conj();
        }
    }

    let mut q = Array2::<Complex64>::eye(n);
    tridiagonalize(&mut a, &mut q);

    let mut diag: Vec<f64> = (0..n).map(|k| a[[k, k]].re).collect();
    let mut off = vec![0.0; n];
    let mut phase = ONE;
    let mut phases = vec![ONE; n];
    for k in 0..n.saturating_sub(1) {
        let e = a[[k + 1, k]];
        let r = e.norm();
        off[k] = r;
        if r > 0.0 {
            phase *= e / r;
        }
        phases[k + 1] = phase;
    }

    let mut z = Array2::<f64>::eye(n);
    tridiagonal_ql(&mut diag, &mut off, &mut z)?;

    // eigenvectors of the original matrix: Q * diag(phases) * Z
    for (k, mut col) in q.axis_iter_mut(Axis(1)).enumerate() {
        col.mapv_inplace(|x| x * phases[k]);
    }
    let zc = z.mapv(|x| Complex64::new(x, 0.0));
    let vectors = q.dot(&zc);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let values = Array1::from_iter(order.iter().map(|&i| diag[i]));
    let mut sorted = Array2::<Complex64>::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        let mut col = vectors.column(src).to_owned();
        fix_phase(&mut col);
        sorted.column_mut(dst).assign(&col);
    }
    Ok((values, sorted))
}

/// Rotates a vector so its largest-modulus entry (first on ties) is real
/// and positive.
pub fn fix_phase(v: &mut Array1<Complex64>) {
    let mut best = 0;
    let mut best_norm = -1.0;
    for (i, x) in v.iter().enumerate() {
        let r = x.norm();
        if r > best_norm * (1.0 + 1e-12) {
            best = i;
            best_norm = r;
        }
    }
    if best_norm > 0.0 {
        let rot = v[best].conj() / best_norm;
        v.mapv_inplace(|x| x * rot);
        v[best] = Complex64::new(v[best].re, 0.0);
    }
}

/// In-place reduction `a <- P* a P` to tridiagonal form, accumulating the
/// reflectors into `q` so that the input equals `q a q*`.
fn tridiagonalize(a: &mut Array2<Complex64>, q: &mut Array2<Complex64>) {
    let n = a.nrows();
    for k in 0..n.saturating_sub(2) {
        let x = a.slice(s![k + 1.., k]).to_owned();
        let alpha = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let tail = x.iter().skip(1).map(|z| z.norm_sqr()).sum::<f64>();
        if alpha == 0.0 || tail <= f64::EPSILON * f64::EPSILON * alpha * alpha {
            continue;
        }
        let x0 = x[0];
        let unit = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        let mut v = x;
        v[0] += unit * alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let tau = 2.0 / vnorm2;

        // trailing block update: A22 <- A22 - v w* - w v*
        let mut block = a.slice_mut(s![k + 1.., k + 1..]);
        let p: Array1<Complex64> = block.dot(&v).mapv(|z| z * tau);
        let vp: Complex64 = v.iter().zip(p.iter()).map(|(vi, pi)| vi.conj() * pi).sum();
        let w: Array1<Complex64> = &p - &v.mapv(|z| z * (0.5 * tau * vp.re));
        let m = v.len();
        for i in 0..m {
            for j in 0..m {
                block[[i, j]] -= v[i] * w[j].conj() + w[i] * v[j].conj();
            }
        }

        // column k below the diagonal becomes -unit * alpha, zeros elsewhere
        let head = -unit * alpha;
        a[[k + 1, k]] = head;
        a[[k, k + 1]] = head.conj();
        for i in k + 2..n {
            a[[i, k]] = ZERO;
            a[[k, i]] = ZERO;
        }

        // q <- q P, P = I - tau v v*
        let mut qblock = q.slice_mut(s![.., k + 1..]);
        let qv: Array1<Complex64> = qblock.dot(&v);
        for r in 0..n {
            let coef = qv[r] * tau;
            for j in 0..m {
                qblock[[r, j]] -= coef * v[j].conj();
            }
        }
    }
}

/// Implicit QL iteration on a real symmetric tridiagonal matrix
/// (`diag`, sub-diagonal `off[0..n-1]`), accumulating rotations into `z`.
fn tridiagonal_ql(diag: &mut [f64], off: &mut [f64], z: &mut Array2<f64>) -> Result<()> {
    let n = diag.len();
    if n <= 1 {
        return Ok(());
    }
    off[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Undefined("tridiagonal QL failed to converge".into()));
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    let zk1 = z[[k, i + 1]];
                    let zk = z[[k, i]];
                    z[[k, i + 1]] = s * zk + c * zk1;
                    z[[k, i]] = c * zk - s * zk1;
                }
            }
            if underflow {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    Ok(())
}
