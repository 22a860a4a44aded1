mod common;

use common::oracles::{dense_scattering, heat_by_expm, orc_by_lp, real_embedding_eigenvalues};
use common::{random_digraph, rng};
use dsae_core::scattering::{build_frame, gaussian_signal, scatter};
use dsae_core::spectral::{hermitian_deviation, magnetic_laplacian};
use dsae_core::DirectedGraph;
use rand::seq::SliceRandom;
use rand::Rng;

#[test]
fn eigenvalues_match_real_embedding() {
    let mut r = rng(11);
    for _ in 0..20 {
        let n = r.gen_range(2..=25);
        let g = random_digraph(&mut r, n, 0.2);
        let q = r.gen_range(0.0..0.5);
        for normalized in [false, true] {
            let l = magnetic_laplacian(&g, q, normalized).unwrap();
            let dec = l.decompose().unwrap();
            let oracle = real_embedding_eigenvalues(&l.matrix);
            for (a, b) in dec.eigenvalues.iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-8, "{a} vs {b}");
            }
        }
    }
}

#[test]
fn laplacian_is_hermitian_and_psd() {
    let mut r = rng(12);
    for _ in 0..20 {
        let n = r.gen_range(2..=30);
        let g = random_digraph(&mut r, n, 0.15);
        for q in [0.0, 0.1, 0.25] {
            let l = magnetic_laplacian(&g, q, true).unwrap();
            assert!(hermitian_deviation(&l.matrix) < 1e-12);
            let min = l.decompose().unwrap().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
            assert!(min >= -1e-10, "min eigenvalue {min}");
        }
    }
}

#[test]
fn heat_kernel_matches_matrix_exponential() {
    let mut r = rng(13);
    let g = random_digraph(&mut r, 15, 0.25);
    let l = magnetic_laplacian(&g, 0.2, true).unwrap();
    let dec = l.decompose().unwrap();
    for t in [0.5, 1.0, 8.0] {
        let ours = dec.heat_kernel(t).unwrap().matrix;
        let oracle = heat_by_expm(&l.matrix, t);
        let err = ours.indexed_iter().map(|((i, j), z)| (z - oracle[(i, j)]).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "t={t}: {err}");
    }
}

#[test]
fn scattering_matches_dense_filters() {
    let mut r = rng(14);
    for trial in 0..5 {
        let g = random_digraph(&mut r, 12, 0.25);
        let q = [0.0, 0.1, 0.25][trial % 3];
        let l = magnetic_laplacian(&g, q, true).unwrap();
        let frame = build_frame(l.decompose().unwrap(), 3);
        let x = gaussian_signal(12, 1, trial as u64).unwrap();
        let ours = scatter(&frame, &x.view()).unwrap();
        let oracle = dense_scattering(&l.matrix, 3, x.column(0).as_slice().unwrap());
        assert_eq!(ours.matrix.dim(), oracle.dim());
        let err = (&ours.matrix - &oracle).iter().fold(0.0f64, |m, d| m.max(d.abs()));
        assert!(err < 1e-9, "trial {trial}: {err}");
    }
}

#[test]
fn scattering_is_permutation_equivariant() {
    let mut r = rng(15);
    let g = random_digraph(&mut r, 14, 0.2);
    let mut perm: Vec<usize> = (0..14).collect();
    perm.shuffle(&mut r);
    let x = gaussian_signal(14, 2, 3).unwrap();
    // vertex v of g becomes perm[v]
    let gp = g.permuted(&perm).unwrap();
    let mut xp = x.clone();
    for v in 0..14 {
        xp.row_mut(perm[v]).assign(&x.row(v));
    }
    let feats = |g: &DirectedGraph, x: &ndarray::Array2<f64>| {
        let frame = build_frame(magnetic_laplacian(g, 0.1, true).unwrap().decompose().unwrap(), 4);
        scatter(&frame, &x.view()).unwrap().matrix
    };
    let (a, b) = (feats(&g, &x), feats(&gp, &xp));
    for v in 0..14 {
        let err = (&a.row(v) - &b.row(perm[v])).iter().fold(0.0f64, |m, d| m.max(d.abs()));
        assert!(err < 1e-9, "vertex {v}: {err}");
    }
}

#[test]
fn frame_telescopes_to_identity() {
    let mut r = rng(16);
    for _ in 0..5 {
        let g = random_digraph(&mut r, 20, 0.15);
        let dec = magnetic_laplacian(&g, 0.25, true).unwrap().decompose().unwrap();
        for j in [0, 3, 10] {
            assert!(build_frame(dec.clone(), j).telescoping_error() < 1e-10);
        }
    }
}

#[test]
fn curvature_matches_lp() {
    let mut r = rng(17);
    let mut checked = 0;
    while checked < 40 {
        let n = r.gen_range(3..=8);
        let g = random_digraph(&mut r, n, 0.3);
        for e in g.edges() {
            let ours = g.ollivier_ricci_edge(e.src, e.dst).unwrap();
            let lp = orc_by_lp(&g, e.src, e.dst);
            assert!((ours - lp).abs() < 1e-9, "{ours} vs {lp}");
            checked += 1;
        }
    }
}
