//! Independent reference implementations used by the integration and
//! acceptance tests.

use std::collections::VecDeque;

use dsae_core::inference::wilcoxon_rank_sum;
use dsae_core::spectral::CMatrix;
use dsae_core::DirectedGraph;
use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::DMatrix;
use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Eigenvalues of a Hermitian `H = A + iB` from the real symmetric
/// embedding `[[A, -B], [B, A]]`, whose spectrum is that of `H` with every
/// eigenvalue doubled.
pub fn real_embedding_eigenvalues(h: &CMatrix) -> Vec<f64> {
    let n = h.nrows();
    let m = DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = h[[i % n, j % n]];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect()
}

fn to_nalgebra(m: &CMatrix) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[[i, j]])
}

/// `exp(-t L)` by scaling and squaring, with no eigendecomposition.
pub fn heat_by_expm(l: &CMatrix, t: f64) -> DMatrix<Complex64> {
    (to_nalgebra(l) * Complex64::new(-t, 0.0)).exp()
}

/// Scattering coefficients for one real signal computed with dense
/// matrix exponentials, in the column order zeroth, first `j1 = 0..=J`,
/// second `(j1, j2)` with `j1 <= j2`.
pub fn dense_scattering(l: &CMatrix, max_scale: usize, x: &[f64]) -> Array2<f64> {
    let n = l.nrows();
    let id = DMatrix::<Complex64>::identity(n, n);
    let h = |t: f64| heat_by_expm(l, t);
    let mut wavelets = vec![&id - h(1.0)];
    for j in 1..=max_scale {
        wavelets.push(h(2f64.powi(j as i32 - 1)) - h(2f64.powi(j as i32)));
    }
    let smooth = h(1.0);
    let vec = nalgebra::DVector::from_iterator(n, x.iter().map(|&v| Complex64::new(v, 0.0)));
    let modulus = |v: nalgebra::DVector<Complex64>| v.map(|z| Complex64::new(z.norm(), 0.0));
    let mut cols: Vec<nalgebra::DVector<Complex64>> = vec![modulus(&smooth * &vec)];
    let layer1: Vec<_> = wavelets.iter().map(|w| modulus(w * &vec)).collect();
    for u in &layer1 {
        cols.push(modulus(&smooth * u));
    }
    for j1 in 0..=max_scale {
        for w2 in &wavelets[j1..] {
            cols.push(modulus(&smooth * modulus(w2 * &layer1[j1])));
        }
    }
    Array2::from_shape_fn((n, cols.len()), |(i, c)| cols[c][i].re)
}

fn hop_distances(adj: &[Vec<usize>]) -> Vec<Vec<f64>> {
    let n = adj.len();
    (0..n)
        .map(|s| {
            let mut d = vec![f64::INFINITY; n];
            d[s] = 0.0;
            let mut q = VecDeque::from([s]);
            while let Some(v) = q.pop_front() {
                for &w in &adj[v] {
                    if d[w].is_infinite() {
                        d[w] = d[v] + 1.0;
                        q.push_back(w);
                    }
                }
            }
            d
        })
        .collect()
}

/// Ollivier-Ricci curvature of `{u, v}` on the symmetrized graph with
/// uniform neighbour measures, transport solved as a dense LP.
pub fn orc_by_lp(g: &DirectedGraph, u: usize, v: usize) -> f64 {
    let n = g.n_vertices();
    let mut adj = vec![Vec::new(); n];
    for e in g.edges() {
        if e.src != e.dst {
            adj[e.src].push(e.dst);
            adj[e.dst].push(e.src);
        }
    }
    for a in &mut adj {
        a.sort_unstable();
        a.dedup();
    }
    let dist = hop_distances(&adj);
    let (nu, nv) = (&adj[u], &adj[v]);
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<Vec<minilp::Variable>> = nu
        .iter()
        .map(|&a| nv.iter().map(|&b| lp.add_var(dist[a][b], (0.0, f64::INFINITY))).collect())
        .collect();
    for row in &vars {
        let expr: Vec<(minilp::Variable, f64)> = row.iter().map(|&x| (x, 1.0)).collect();
        lp.add_constraint(expr.as_slice(), ComparisonOp::Eq, 1.0 / nu.len() as f64);
    }
    for j in 0..nv.len() {
        let expr: Vec<(minilp::Variable, f64)> = vars.iter().map(|row| (row[j], 1.0)).collect();
        lp.add_constraint(expr.as_slice(), ComparisonOp::Eq, 1.0 / nv.len() as f64);
    }
    1.0 - lp.solve().expect("feasible transport").objective()
}

fn midranks_naive(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|&x| {
            let below = v.iter().filter(|&&y| y < x).count() as f64;
            let equal = v.iter().filter(|&&y| y == x).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

/// Two-sided exact permutation p-value of the rank-sum statistic,
/// enumerating every assignment of the pooled ranks to the first group.
pub fn exact_rank_sum_p(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks_naive(&pooled);
    let (n1, n) = (a.len(), pooled.len());
    let mean = n1 as f64 * (n as f64 + 1.0) / 2.0;
    let observed = (ranks[..n1].iter().sum::<f64>() - mean).abs();
    let (mut hits, mut total) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != n1 {
            continue;
        }
        let w: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        total += 1;
        if (w - mean).abs() >= observed - 1e-9 {
            hits += 1;
        }
    }
    hits as f64 / total as f64
}

/// `sup_x (F_low(x) - F_high(x))` evaluated at every pooled sample point
/// and at minus infinity.
pub fn ks_direct(high: &[f64], low: &[f64]) -> f64 {
    let cdf = |s: &[f64], x: f64| s.iter().filter(|&&v| v <= x).count() as f64 / s.len() as f64;
    high.iter()
        .chain(low)
        .map(|&x| cdf(low, x) - cdf(high, x))
        .fold(0.0, f64::max)
}

/// Fraction of (positive, negative) pairs ranked correctly, ties counted
/// one half.
pub fn auroc_brute(scores: &[f64], labels: &[bool]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (i, &si) in scores.iter().enumerate() {
        if !labels[i] {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] {
                continue;
            }
            den += 1.0;
            num += if si > sj {
                1.0
            } else if si == sj {
                0.5
            } else {
                0.0
            };
        }
    }
    num / den
}

/// Largest relative deviation of the normal-approximation p-value from the
/// exact permutation p-value over random groups with exact p >= 0.05.
/// `ties` draws from a small integer range instead of the unit interval.
pub fn wilcoxon_worst_relative_error(instances: usize, seed: u64, ties: bool) -> (f64, usize) {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst, mut used) = (0.0f64, 0);
    for _ in 0..instances {
        let (n1, n2) = (r.gen_range(3..=8), r.gen_range(3..=8));
        let mut draw = |shift: f64| if ties { (r.gen_range(0..12) as f64 + 2.0 * shift).round() } else { r.gen::<f64>() + shift };
        let a: Vec<f64> = (0..n1).map(|_| draw(0.0)).collect();
        let b: Vec<f64> = (0..n2).map(|_| draw(0.3)).collect();
        let exact = exact_rank_sum_p(&a, &b);
        if exact < 0.05 {
            continue;
        }
        let (_, p) = wilcoxon_rank_sum(&a, &b).unwrap();
        worst = worst.max((p - exact).abs() / exact);
        used += 1;
    }
    (worst, used)
}
