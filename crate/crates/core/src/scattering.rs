//! Heat-kernel wavelet frames and directed geometric scattering.
//!
//! Wavelets are never materialized during scattering: every filter is a
//! function of the eigenvalues and is applied in the eigenbasis of the
//! cached decomposition.

use std::io::Write;
use std::path::Path;

use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{CMatrix, SpectralDecomposition};

/// `{W_0, ..., W_J} ∪ {A_J}` with `W_0 = I - H_1`,
/// `W_j = H_{2^(j-1)} - H_{2^j}` and `A_J = H_{2^J}`, plus the smoother `H_1`
/// used as the final filter of every scattering path.
#[derive(Debug, Clone)]
pub struct WaveletFrame {
    decomposition: SpectralDecomposition,
    max_scale: usize,
}

impl WaveletFrame {
    pub fn new(decomposition: SpectralDecomposition, max_scale: usize) -> Self {
        Self {
            decomposition,
            max_scale,
        }
    }

    pub fn max_scale(&self) -> usize {
        self.max_scale
    }

    pub fn decomposition(&self) -> &SpectralDecomposition {
        &self.decomposition
    }

    pub fn n(&self) -> usize {
        self.decomposition.n()
    }

    /// Spectral response of `W_j` at eigenvalue `lambda`.
    pub fn wavelet_response(j: usize, lambda: f64) -> f64 {
        if j == 0 {
            1.0 - (-lambda).exp()
        } else {
            let t = 2f64.powi(j as i32);
            (-0.5 * t * lambda).exp() - (-t * lambda).exp()
        }
    }

    pub fn lowpass_response(&self, lambda: f64) -> f64 {
        (-(2f64.powi(self.max_scale as i32)) * lambda).exp()
    }

    fn responses(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.decomposition.eigenvalues.iter().map(|&l| f(l)).collect()
    }

    pub fn wavelet(&self, j: usize) -> Result<CMatrix> {
        if j > self.max_scale {
            return Err(Error::InvalidArgument(format!("scale {j} exceeds J = {}", self.max_scale)));
        }
        Ok(self.decomposition.filter_matrix(|l| Self::wavelet_response(j, l)))
    }

    pub fn lowpass(&self) -> CMatrix {
        self.decomposition.filter_matrix(|l| self.lowpass_response(l))
    }

    pub fn smoother(&self) -> CMatrix {
        self.decomposition.filter_matrix(|l| (-l).exp())
    }

    /// Largest entrywise deviation of `sum_j W_j + A_J` from the identity.
    pub fn telescoping_error(&self) -> f64 {
        let n = self.n();
        let mut total = self.lowpass();
        for j in 0..=self.max_scale {
            total += &self.wavelet(j).expect("in range");
        }
        crate::spectral::max_abs_diff(&total, &CMatrix::eye(n))
    }
}

pub fn build_frame(dec: SpectralDecomposition, max_scale: usize) -> WaveletFrame {
    WaveletFrame::new(dec, max_scale)
}

/// Which coefficient a feature column holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coefficient {
    Zeroth { signal: usize },
    First { j1: usize, signal: usize },
    Second { j1: usize, j2: usize, signal: usize },
}

impl Coefficient {
    pub fn column_name(&self) -> String {
        match *self {
            Coefficient::Zeroth { signal } => format!("s0_sig{signal}"),
            Coefficient::First { j1, signal } => format!("s1_j{j1}_sig{signal}"),
            Coefficient::Second { j1, j2, signal } => format!("s2_j{j1}_j{j2}_sig{signal}"),
        }
    }
}

/// Number of scattering features per vertex for `signals` inputs and
/// maximal scale `max_scale`.
pub fn feature_count(signals: usize, max_scale: usize) -> usize {
    let scales = max_scale + 1;
    signals * (1 + scales + scales * (scales + 1) / 2)
}

/// Per-vertex scattering coefficients, `N x F`, entries real and `>= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringFeatures {
    pub matrix: Array2<f64>,
    pub columns: Vec<Coefficient>,
}

impl ScatteringFeatures {
    pub fn n_vertices(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn column_names(&self) -> Vec<String> {
        self.columns.iter().map(Coefficient::column_name).collect()
    }

    /// CSV with a `vertex` column followed by one column per coefficient.
    pub fn write_csv(&self, path: &Path, vertex_labels: &[String]) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        write!(out, "vertex")?;
        for name in self.column_names() {
            write!(out, ",{name}")?;
        }
        writeln!(out)?;
        for (v, row) in self.matrix.rows().into_iter().enumerate() {
            write!(out, "{}", vertex_labels.get(v).cloned().unwrap_or_else(|| v.to_string()))?;
            for x in row {
                write!(out, ",{x}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

fn modulus(m: &CMatrix) -> Array2<f64> {
    m.mapv(|z| z.norm())
}

fn complexify(m: &ArrayView2<f64>) -> CMatrix {
    m.mapv(|x| Complex64::new(x, 0.0))
}

/// Zeroth-, first- and second-order scattering of the columns of `signals`:
/// `|H_1 x|`, `|H_1 |W_j1 x||` and `|H_1 |W_j2 |W_j1 x|||` for
/// `0 <= j1 <= j2 <= J`.
///
/// Columns are grouped by signal, then by order, then by `(j1, j2)` in
/// lexicographic order.
pub fn scatter(frame: &WaveletFrame, signals: &ArrayView2<f64>) -> Result<ScatteringFeatures> {
    let n = frame.n();
    if signals.nrows() != n {
        return Err(Error::Dimension(format!(
            "signals have {} rows, graph has {n} vertices",
            signals.nrows()
        )));
    }
    let dec = frame.decomposition();
    let scales = frame.max_scale() + 1;
    let smooth = frame.responses(|l| (-l).exp());
    let wavelets: Vec<Vec<f64>> = (0..scales)
        .map(|j| frame.responses(|l| WaveletFrame::wavelet_response(j, l)))
        .collect();
    let n_signals = signals.ncols();

    let x = complexify(signals);
    let x_hat = dec.analyze(&x.view());
    let zeroth = modulus(&dec.synthesize(&x_hat, &smooth));

    // first layer |W_j1 x| for every scale, all signals at once
    let layer1: Vec<Array2<f64>> = wavelets
        .iter()
        .map(|w| modulus(&dec.synthesize(&x_hat, w)))
        .collect();
    let layer1_hat: Vec<CMatrix> = layer1
        .iter()
        .map(|m| dec.analyze(&complexify(&m.view()).view()))
        .collect();
    let first: Vec<Array2<f64>> = layer1_hat
        .iter()
        .map(|h| modulus(&dec.synthesize(h, &smooth)))
        .collect();

    let mut second: Vec<((usize, usize), Array2<f64>)> = Vec::new();
    for j1 in 0..scales {
        for j2 in j1..scales {
            let inner = modulus(&dec.synthesize(&layer1_hat[j1], &wavelets[j2]));
            let inner_hat = dec.analyze(&complexify(&inner.view()).view());
            second.push(((j1, j2), modulus(&dec.synthesize(&inner_hat, &smooth))));
        }
    }

    let f = feature_count(n_signals, frame.max_scale());
    let mut matrix = Array2::<f64>::zeros((n, f));
    let mut columns = Vec::with_capacity(f);
    for signal in 0..n_signals {
        let mut push = |coef: Coefficient, src: &Array2<f64>| {
            matrix.column_mut(columns.len()).assign(&src.column(signal));
            columns.push(coef);
        };
        push(Coefficient::Zeroth { signal }, &zeroth);
        for (j1, m) in first.iter().enumerate() {
            push(Coefficient::First { j1, signal }, m);
        }
        for ((j1, j2), m) in &second {
            push(
                Coefficient::Second {
                    j1: *j1,
                    j2: *j2,
                    signal,
                },
                m,
            );
        }
    }
    Ok(ScatteringFeatures { matrix, columns })
}

/// `n x c` matrix of i.i.d. standard normal entries, filled row-major.
///
/// The stream is ChaCha8 seeded with `seed` (via `SeedableRng::seed_from_u64`)
/// transformed by the ziggurat sampler of `rand_distr::StandardNormal`; both
/// are platform independent, so a seed reproduces the same signals anywhere.
pub fn gaussian_signal(n: usize, c: usize, seed: u64) -> Result<Array2<f64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("signal length must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(Array2::from_shape_simple_fn((n, c), || StandardNormal.sample(&mut rng)))
}
