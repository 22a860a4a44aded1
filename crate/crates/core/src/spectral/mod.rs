//! Magnetic Laplacians of directed graphs and their spectra.

mod eigen;

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;

pub use eigen::{fix_phase, hermitian_deviation, hermitian_eigen};

pub type CMatrix = Array2<Complex64>;

/// Complex Hermitian Laplacian encoding edge direction in the phases
/// `exp(i 2 pi q (A - A^T))`.
#[derive(Debug, Clone)]
pub struct MagneticLaplacian {
    pub matrix: CMatrix,
    pub q: f64,
    pub normalized: bool,
}

impl MagneticLaplacian {
    pub fn new(g: &DirectedGraph, q: f64, normalized: bool) -> Result<Self> {
        if !(q.is_finite() && q >= 0.0) {
            return Err(Error::InvalidArgument(format!("charge q must be >= 0, got {q}")));
        }
        if g.n_vertices() == 0 {
            return Err(Error::Empty("graph has no vertices".into()));
        }
        let n = g.n_vertices();
        let mut adj = Array2::<f64>::zeros((n, n));
        for e in g.edges() {
            adj[[e.src, e.dst]] = e.weight;
        }
        let mut matrix = CMatrix::zeros((n, n));
        let mut degree = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                let sym = 0.5 * (adj[[i, j]] + adj[[j, i]]);
                if sym == 0.0 {
                    continue;
                }
                degree[i] += sym;
                let theta = 2.0 * PI * q * (adj[[i, j]] - adj[[j, i]]);
                matrix[[i, j]] = -Complex64::from_polar(sym, theta);
            }
        }
        for i in 0..n {
            matrix[[i, i]] += degree[i];
        }
        if normalized {
            let scale: Vec<f64> = degree
                .iter()
                .map(|&d| if d > 0.0 { d.powf(-0.5) } else { 0.0 })
                .collect();
            for ((i, j), x) in matrix.indexed_iter_mut() {
                *x *= scale[i] * scale[j];
            }
        }
        // theta_ji = -theta_ij, but cos/sin round differently; enforce exact symmetry
        for i in 0..n {
            matrix[[i, i]].im = 0.0;
            for j in 0..i {
                matrix[[j, i]] = matrix[[i, j]].conj();
            }
        }
        Ok(Self { matrix, q, normalized })
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn decompose(&self) -> Result<SpectralDecomposition> {
        SpectralDecomposition::of(self)
    }
}

/// Builds the magnetic Laplacian `L_U = D - H` or `L_N = D^-1/2 L_U D^-1/2`.
pub fn magnetic_laplacian(g: &DirectedGraph, q: f64, normalized: bool) -> Result<MagneticLaplacian> {
    MagneticLaplacian::new(g, q, normalized)
}

/// Ascending eigenvalues and matching orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Array1<f64>,
    pub eigenvectors: CMatrix,
    /// `eigenvectors^*`, cached for repeated filtering.
    adjoint: CMatrix,
}

impl SpectralDecomposition {
    /// Full decomposition of a magnetic Laplacian. Negative round-off
    /// eigenvalues are clamped to zero.
    pub fn of(l: &MagneticLaplacian) -> Result<Self> {
        let (mut values, vectors) = hermitian_eigen(&l.matrix)?;
        values.mapv_inplace(|v| v.max(0.0));
        Ok(Self::from_parts(values, vectors))
    }

    pub fn from_parts(eigenvalues: Array1<f64>, eigenvectors: CMatrix) -> Self {
        let adjoint = eigenvectors.t().mapv(|z| z.conj());
        Self {
            eigenvalues,
            eigenvectors,
            adjoint,
        }
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `U diag(response(lambda)) U^*` as a dense matrix.
    pub fn filter_matrix(&self, response: impl Fn(f64) -> f64) -> CMatrix {
        let mut scaled = self.eigenvectors.clone();
        for (k, mut col) in scaled.axis_iter_mut(Axis(1)).enumerate() {
            let g = response(self.eigenvalues[k]);
            col.mapv_inplace(|z| z * g);
        }
        scaled.dot(&self.adjoint)
    }

    /// Coefficients `U^* x` of the columns of `x` in the eigenbasis.
    pub fn analyze(&self, x: &ArrayView2<Complex64>) -> CMatrix {
        self.adjoint.dot(x)
    }

    /// `U diag(response) coeffs`.
    pub fn synthesize(&self, coeffs: &CMatrix, response: &[f64]) -> CMatrix {
        let mut scaled = coeffs.clone();
        for (k, mut row) in scaled.axis_iter_mut(Axis(0)).enumerate() {
            row.mapv_inplace(|z| z * response[k]);
        }
        self.eigenvectors.dot(&scaled)
    }

    /// Applies the spectral filter to the columns of `x` without forming the
    /// filter matrix.
    pub fn apply_filter(&self, x: &ArrayView2<Complex64>, response: &[f64]) -> CMatrix {
        self.synthesize(&self.analyze(x), response)
    }

    pub fn heat_kernel(&self, t: f64) -> Result<HeatKernel> {
        if !(t >= 0.0) {
            return Err(Error::InvalidArgument(format!("diffusion time must be >= 0, got {t}")));
        }
        Ok(HeatKernel {
            t,
            matrix: self.filter_matrix(|l| (-l * t).exp()),
        })
    }

    /// Writes eigenvalues and the eigenvector matrix as CSV for inspection:
    /// one row per eigenpair, `k,lambda,re_0,im_0,...`.
    pub fn dump_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        write!(out, "k,lambda")?;
        for i in 0..self.n() {
            write!(out, ",re_{i},im_{i}")?;
        }
        writeln!(out)?;
        for k in 0..self.n() {
            write!(out, "{k},{:e}", self.eigenvalues[k])?;
            for z in self.eigenvectors.column(k) {
                write!(out, ",{:e},{:e}", z.re, z.im)?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// `H_t = sum_k exp(-lambda_k t) u_k u_k^*`.
#[derive(Debug, Clone)]
pub struct HeatKernel {
    pub t: f64,
    pub matrix: CMatrix,
}

pub fn heat_kernel(dec: &SpectralDecomposition, t: f64) -> Result<HeatKernel> {
    dec.heat_kernel(t)
}

/// Entrywise maximum modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
