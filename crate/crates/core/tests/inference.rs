mod common;

use std::collections::HashMap;

use common::oracles::{exact_rank_sum_p, ks_direct, wilcoxon_worst_relative_error};
use common::rng;
use dsae_core::inference::fixture::{
    planted_cross_network, planted_expression, planted_prior, planted_spatial, write_fixture, MARKERS_PER_TYPE, TYPE_A,
    TYPE_B,
};
use dsae_core::inference::{
    build_celltype_graph, infer_network, inference_defaults, knn_union_pairs, ks_test_one_sided,
    mutual_information, select_marker_genes, validate_spatial, wilcoxon_rank_sum, CellAnnotations,
    ExpressionMatrix, InferredNetwork, MarkerSets, SpatialOptions,
};
use dsae_core::{DirectedGraph, Geometry, NodeEmbeddings};
use ndarray::Array2;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

#[test]
fn wilcoxon_tracks_exact_permutation() {
    let (worst, used) = wilcoxon_worst_relative_error(1000, 31, false);
    assert!(used > 300);
    assert!(worst < 0.25, "worst relative error {worst}");
    // heavy ties in groups of three leave the normal regime; stays bounded
    let (worst, _) = wilcoxon_worst_relative_error(1000, 31, true);
    assert!(worst < 0.5, "worst relative error with ties {worst}");
    let exact = exact_rank_sum_p(&[1.0, 2.0, 3.0], &[10.0, 11.0, 12.0]);
    assert!((exact - 0.1).abs() < 1e-12);
    let (_, p) = wilcoxon_rank_sum(&[1.0, 2.0, 3.0], &[10.0, 11.0, 12.0]).unwrap();
    assert!(p < 0.1);
}

proptest! {
    #[test]
    fn ks_matches_direct_definition(
        high in prop::collection::vec(0u8..20, 1..9),
        low in prop::collection::vec(0u8..20, 1..9),
        shift in 0u8..5,
    ) {
        let h: Vec<f64> = high.iter().map(|&v| v as f64).collect();
        let l: Vec<f64> = low.iter().map(|&v| v as f64).collect();
        let (d, p) = ks_test_one_sided(&h, &l).unwrap();
        prop_assert_eq!(d, ks_direct(&h, &l));
        let m = (h.len() * l.len()) as f64 / (h.len() + l.len()) as f64;
        prop_assert!((p - (-2.0 * m * d * d).exp()).abs() < 1e-15);
        let shifted: Vec<f64> = h.iter().map(|v| v + shift as f64).collect();
        prop_assert!(ks_test_one_sided(&shifted, &l).unwrap().0 >= d);
    }

    #[test]
    fn mi_is_symmetric_and_nonnegative(
        pairs in prop::collection::vec((-50i32..50, -50i32..50), 8..100),
    ) {
        let x: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
        let y: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
        let a = mutual_information(&x, &y, 8).unwrap();
        prop_assert!(a >= 0.0);
        prop_assert_eq!(a, mutual_information(&y, &x, 8).unwrap());
    }
}

#[test]
fn mi_reference_values() {
    let mut r = rng(32);
    let x: Vec<f64> = (0..10_000).map(|_| r.gen::<f64>()).collect();
    let y: Vec<f64> = (0..10_000).map(|_| r.gen::<f64>()).collect();
    assert!(mutual_information(&x, &y, 8).unwrap() < 0.02);
    let same = mutual_information(&x, &x, 8).unwrap();
    assert!((same - 8f64.ln()).abs() < 0.05 * 8f64.ln());
    let centered: Vec<f64> = x.iter().map(|v| v - 0.5).collect();
    let neg: Vec<f64> = centered.iter().map(|v| -v).collect();
    let a = mutual_information(&centered, &centered, 8).unwrap();
    assert!((mutual_information(&centered, &neg, 8).unwrap() - a).abs() < 1e-2);
}

#[test]
fn planted_markers_are_recovered_exactly() {
    for seed in 0..5 {
        let (expr, ann) = planted_expression(30, seed);
        let m = select_marker_genes(&expr, &ann, TYPE_A, TYPE_B, 2.0, 0.05).unwrap();
        let expect = |range: std::ops::Range<usize>| -> Vec<String> { range.map(|g| format!("G{g}")).collect() };
        assert_eq!(m.genes_i, expect(0..MARKERS_PER_TYPE));
        assert_eq!(m.genes_j, expect(MARKERS_PER_TYPE..2 * MARKERS_PER_TYPE));
    }
}

#[test]
fn marker_selection_rejects_small_or_missing_types() {
    let (expr, mut ann) = planted_expression(30, 0);
    assert!(select_marker_genes(&expr, &ann, TYPE_A, "C", 2.0, 0.05).is_err());
    for t in ann.cell_type.iter_mut().skip(2) {
        *t = TYPE_B.into();
    }
    assert!(select_marker_genes(&expr, &ann, TYPE_A, TYPE_B, 2.0, 0.05).is_err());
}

fn euclidean(points: &[f64]) -> NodeEmbeddings {
    NodeEmbeddings {
        matrix: Array2::from_shape_vec((points.len(), 1), points.to_vec()).unwrap(),
        geometry: Geometry::Euclidean,
        curvature: 1.0,
        names: (0..points.len()).map(|i| i.to_string()).collect(),
    }
}

#[test]
fn knn_edge_count_bounds() {
    let mut r = rng(33);
    for _ in 0..20 {
        let n = r.gen_range(3..30);
        let pts: Vec<f64> = (0..n).map(|_| r.gen::<f64>()).collect();
        let k = r.gen_range(1..n);
        let e = knn_union_pairs(&euclidean(&pts), k).unwrap();
        assert!(e.len() >= (n * k).div_ceil(2) && e.len() <= n * k, "n={n} k={k}: {}", e.len());
    }
}

#[test]
fn two_cluster_embedding_recovers_bridge() {
    // clusters at 0 and 10; 4.5 and 5.5 face each other across the gap
    let pts = [0.0, 0.3, 0.6, 0.9, 4.5, 5.5, 9.1, 9.4, 9.7, 10.0];
    let pairs = knn_union_pairs(&euclidean(&pts), 2).unwrap();
    assert!(pairs.contains(&(4, 5)));
    let cross = pairs.iter().filter(|&&(u, v)| (u < 5) != (v < 5)).count();
    assert_eq!(cross, 1);
}

#[test]
fn six_gene_prior() {
    let names: Vec<String> = ["L1", "T1", "T2", "R1", "U1", "U2"].iter().map(|s| s.to_string()).collect();
    let prior = DirectedGraph::from_pairs(6, &[(1, 0), (2, 0), (0, 3), (3, 4), (3, 5)])
        .with_names(names.clone())
        .unwrap();
    let markers = MarkerSets {
        type_i: "A".into(),
        type_j: "B".into(),
        genes_i: names[..3].to_vec(),
        genes_j: names[3..].to_vec(),
        tests: Vec::new(),
    };
    let ann: HashMap<String, bool> = names.iter().map(|g| (g.clone(), true)).collect();
    let ctg = build_celltype_graph(&prior, &markers, &ann).unwrap();
    let flagged: Vec<String> = (0..6).filter(|&v| ctg.intercellular[v]).map(|v| ctg.gene(v)).collect();
    assert_eq!(flagged, vec!["L1", "R1"]);
}

fn planted_celltype_graph(seed: u64) -> dsae_core::inference::CellTypeGraph {
    let (expr, ann) = planted_expression(30, seed);
    let markers = select_marker_genes(&expr, &ann, TYPE_A, TYPE_B, 2.0, 0.05).unwrap();
    let (prior, flags) = planted_prior(0);
    build_celltype_graph(&prior, &markers, &flags).unwrap()
}

#[test]
fn inference_outputs_are_consistent() {
    let ctg = planted_celltype_graph(0);
    assert_eq!(ctg.graph.n_vertices(), 2 * MARKERS_PER_TYPE);
    let cfg = inference_defaults();
    let out = infer_network(&ctg, &cfg, 5).unwrap();
    let net = &out.network;
    let n = ctg.graph.n_vertices();
    assert!(net.edges.len() >= (n * 5).div_ceil(2) && net.edges.len() <= n * 5);
    for e in &net.edges {
        let prior = ctg.graph.has_edge(e.src, e.dst);
        assert_eq!(prior, e.provenance == dsae_core::inference::Provenance::PriorSupported);
    }
    let mut csv = Vec::new();
    net.write_csv(&mut csv, &["alpha=10 beta=5 gamma=1 k=5".into()]).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("# alpha=10 beta=5 gamma=1 k=5\nsrc,dst,confidence,provenance\n"));
    assert_eq!(text.lines().count(), net.edges.len() + 2);
    let mut dot = Vec::new();
    net.write_dot(&mut dot).unwrap();
    let dot = String::from_utf8(dot).unwrap();
    assert!(dot.starts_with("digraph") && dot.matches("->").count() == net.edges.len());
    assert!(infer_network(&ctg, &cfg, n).is_err());
    let again = infer_network(&ctg, &cfg, 5).unwrap();
    assert_eq!(again.network, out.network);
}

#[test]
fn planted_bridge_is_recovered_and_oriented() {
    let ctg = planted_celltype_graph(0);
    let mut hits = 0;
    for seed in 0..5 {
        let cfg = dsae_core::DsaeConfig {
            seed,
            ..inference_defaults()
        };
        let net = infer_network(&ctg, &cfg, 5).unwrap().network;
        if net.contains("G9", "G10") {
            hits += 1;
        }
        assert!(!net.contains("G10", "G9"));
    }
    assert!(hits >= 4, "{hits}/5");
}

fn spatial_report(net: &InferredNetwork, ann: &CellAnnotations, expr: &ExpressionMatrix) -> (f64, f64) {
    let r = validate_spatial(net, expr, ann, &SpatialOptions::default()).unwrap();
    (
        r.ks_network_vs_random.unwrap().p_value,
        r.ks_close_vs_distant.unwrap().p_value,
    )
}

#[test]
fn spatial_validation_separates_planted_from_null() {
    let (expr, ann) = planted_spatial(300, 2, 0);
    let net = planted_cross_network();
    let (p_random, p_distant) = spatial_report(&net, &ann, &expr);
    assert!(p_random < 0.05 && p_distant < 0.05, "{p_random} {p_distant}");

    let mut rotated = net.clone();
    for e in &mut rotated.edges {
        e.dst = MARKERS_PER_TYPE + (e.dst + 1) % MARKERS_PER_TYPE;
    }
    let (p_random, p_distant) = spatial_report(&rotated, &ann, &expr);
    assert!(p_random > 0.05 && p_distant > 0.05, "{p_random} {p_distant}");

    let mut shuffled = ann.clone();
    shuffled.fov.as_mut().unwrap().shuffle(&mut rng(34));
    let (p_random, p_distant) = spatial_report(&net, &shuffled, &expr);
    assert!(p_random > 0.05 && p_distant > 0.05, "{p_random} {p_distant}");
}

#[test]
fn spatial_validation_needs_two_fields() {
    let (expr, mut ann) = planted_spatial(3, 4, 0);
    ann.fov = Some(vec!["one".into(); expr.cells.len()]);
    assert!(validate_spatial(&planted_cross_network(), &expr, &ann, &SpatialOptions::default()).is_err());
}

#[test]
fn fixture_files_round_trip() {
    let dir = std::env::temp_dir().join(format!("dsae-fixture-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    write_fixture(&dir, 0).unwrap();
    let expr = ExpressionMatrix::load_csv(&dir.join("expression.csv")).unwrap();
    let (orig, _) = planted_expression(30, 0);
    assert_eq!(expr, orig);
    let ann = CellAnnotations::load_csv(&dir.join("spatial_labels.csv"), &planted_spatial(300, 2, 0).0.cells).unwrap();
    assert_eq!(ann.fov.unwrap().len(), 600);
    std::fs::remove_dir_all(&dir).unwrap();
}

