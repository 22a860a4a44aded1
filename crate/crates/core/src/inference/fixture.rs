//! Planted two-cell-type data for end-to-end checks of the inference
//! pipeline.

use std::collections::{BTreeSet, HashMap};

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::expression::{CellAnnotations, ExpressionMatrix};
use super::network::{InferredEdge, InferredNetwork, Provenance};
use crate::graph::DirectedGraph;

pub const TYPE_A: &str = "A";
pub const TYPE_B: &str = "B";
pub const N_GENES: usize = 40;
pub const MARKERS_PER_TYPE: usize = 10;
/// Last gene of the type-A module.
pub const LIGAND: usize = MARKERS_PER_TYPE - 1;
/// First gene of the type-B module.
pub const RECEPTOR: usize = MARKERS_PER_TYPE;

pub fn gene_name(g: usize) -> String {
    format!("G{g}")
}

/// Fields of view in the spatial fixture written by [`write_fixture`].
pub const SPATIAL_FOVS: usize = 300;

pub fn gene_names() -> Vec<String> {
    (0..N_GENES).map(gene_name).collect()
}

/// Genes `0..10` mark type A and `10..20` mark type B with an 8x mean
/// shift; the remaining genes share one distribution across types.
/// Multiplicative log-normal noise.
pub fn planted_expression(cells_per_type: usize, seed: u64) -> (ExpressionMatrix, CellAnnotations) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 2 * cells_per_type;
    let mut values = Array2::zeros((n, N_GENES));
    let mut cell_type = Vec::with_capacity(n);
    for c in 0..n {
        let t = usize::from(c >= cells_per_type);
        cell_type.push(if t == 0 { TYPE_A } else { TYPE_B }.to_string());
        for g in 0..N_GENES {
            let mean = match g / MARKERS_PER_TYPE {
                m if m < 2 && m == t => 8.0,
                m if m < 2 => 1.0,
                _ => 2.0,
            };
            let z: f64 = StandardNormal.sample(&mut rng);
            values[[c, g]] = mean * (0.4 * z).exp();
        }
    }
    let cells = (0..n).map(|c| format!("cell{c}")).collect();
    let expr = ExpressionMatrix::new(cells, gene_names(), values).expect("consistent shapes");
    let ann = CellAnnotations {
        cell_type,
        fov: None,
        coords: None,
    };
    (expr, ann)
}

/// Prior network over all genes. Type-A markers feed into the ligand, the
/// receptor feeds every other type-B marker, a few random forward edges
/// run inside each module, the single cross-module edge runs from
/// [`LIGAND`] to [`RECEPTOR`], and background genes connect to each other
/// and to a few markers. Returns the graph and the intercellular
/// annotation (ligand, receptor and one within-module decoy).
pub fn planted_prior(seed: u64) -> (DirectedGraph, HashMap<String, bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = BTreeSet::new();
    let m = MARKERS_PER_TYPE;
    // type A converges on the ligand, the receptor fans out over type B
    for u in 0..LIGAND {
        edges.insert((u, LIGAND));
    }
    for v in RECEPTOR + 1..2 * m {
        edges.insert((RECEPTOR, v));
    }
    for _ in 0..m / 2 {
        for base in [0, RECEPTOR + 1] {
            let span = m - 1;
            let u = rng.gen_range(0..span - 1);
            let v = rng.gen_range(u + 1..span);
            edges.insert((base + u, base + v));
        }
    }
    edges.insert((LIGAND, RECEPTOR));
    for v in 2 * m..N_GENES {
        if v > 2 * m {
            edges.insert((rng.gen_range(2 * m..v), v));
        }
        edges.insert((v, rng.gen_range(0..2 * m)));
    }
    let pairs: Vec<(usize, usize)> = edges.into_iter().collect();
    let g = DirectedGraph::from_pairs(N_GENES, &pairs)
        .with_names(gene_names())
        .expect("unique names");
    let mut ann: HashMap<String, bool> = gene_names().into_iter().map(|g| (g, false)).collect();
    for g in [LIGAND, RECEPTOR, 3] {
        ann.insert(gene_name(g), true);
    }
    (g, ann)
}

/// Spatial panel over [`N_GENES`] genes in `n_fov` fields of view with
/// `cells_per_fov` cells each (types alternate). Every gene carries a
/// per-field factor; in type-B cells gene `10 + k` (`k < 10`) reuses the
/// factor of type-A gene `k`, which plants the cross-type pairs.
pub fn planted_spatial(n_fov: usize, cells_per_fov: usize, seed: u64) -> (ExpressionMatrix, CellAnnotations) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n_fov * cells_per_fov;
    let m = MARKERS_PER_TYPE;
    let mut values = Array2::zeros((n, N_GENES));
    let mut cell_type = Vec::with_capacity(n);
    let mut fov = Vec::with_capacity(n);
    let mut coords = Vec::with_capacity(n);
    for f in 0..n_fov {
        let latent: Vec<f64> = (0..N_GENES).map(|_| StandardNormal.sample(&mut rng)).collect();
        for c in 0..cells_per_fov {
            let row = f * cells_per_fov + c;
            let t = c % 2;
            cell_type.push(if t == 0 { TYPE_A } else { TYPE_B }.to_string());
            fov.push(format!("fov{f}"));
            coords.push((f as f64 * 1000.0 + rng.gen_range(0.0..500.0), rng.gen_range(0.0..500.0)));
            for g in 0..N_GENES {
                let z: f64 = StandardNormal.sample(&mut rng);
                let u = if t == 1 && (m..2 * m).contains(&g) { latent[g - m] } else { latent[g] };
                values[[row, g]] = 2.0 * (u + 0.3 * z).exp();
            }
        }
    }
    let cells = (0..n).map(|c| format!("spot{c}")).collect();
    let expr = ExpressionMatrix::new(cells, gene_names(), values).expect("consistent shapes");
    let ann = CellAnnotations {
        cell_type,
        fov: Some(fov),
        coords: Some(coords),
    };
    (expr, ann)
}

/// The ten co-varying cross-type pairs `k -> 10 + k` of [`planted_spatial`].
pub fn planted_cross_network() -> InferredNetwork {
    let m = MARKERS_PER_TYPE;
    InferredNetwork {
        edges: (0..m)
            .map(|k| InferredEdge {
                src: k,
                dst: m + k,
                confidence: 1.0,
                provenance: Provenance::DeNovo,
            })
            .collect(),
        names: (0..2 * m).map(gene_name).collect(),
        celltype_of: (0..2 * m).map(|g| g / m).collect(),
        type_names: [TYPE_A.to_string(), TYPE_B.to_string()],
    }
}

/// Writes the fixture as CSV files into `dir`: `expression.csv`,
/// `labels.csv`, `prior.tsv`, `annotation.csv`, `spatial.csv` and
/// `spatial_labels.csv`.
pub fn write_fixture(dir: &std::path::Path, seed: u64) -> crate::Result<()> {
    use std::fmt::Write as _;
    let matrix_csv = |expr: &ExpressionMatrix| {
        let mut s = format!("cell,{}\n", expr.genes.join(","));
        for (c, row) in expr.values.rows().into_iter().enumerate() {
            let vals: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(s, "{},{}", expr.cells[c], vals.join(","));
        }
        s
    };
    let (expr, ann) = planted_expression(30, seed);
    std::fs::write(dir.join("expression.csv"), matrix_csv(&expr))?;
    let mut labels = String::from("cell,cell_type\n");
    for (c, t) in expr.cells.iter().zip(&ann.cell_type) {
        let _ = writeln!(labels, "{c},{t}");
    }
    std::fs::write(dir.join("labels.csv"), labels)?;
    let (prior, flags) = planted_prior(seed);
    let mut tsv = String::new();
    for e in prior.edges() {
        let _ = writeln!(tsv, "{}\t{}", prior.vertex_label(e.src), prior.vertex_label(e.dst));
    }
    std::fs::write(dir.join("prior.tsv"), tsv)?;
    let mut a = String::from("gene,intercellular\n");
    for g in gene_names() {
        let _ = writeln!(a, "{g},{}", flags[&g]);
    }
    std::fs::write(dir.join("annotation.csv"), a)?;
    let (sp, sp_ann) = planted_spatial(SPATIAL_FOVS, 2, seed);
    std::fs::write(dir.join("spatial.csv"), matrix_csv(&sp))?;
    let mut l = String::from("cell,cell_type,fov,x,y\n");
    let fov = sp_ann.fov.as_ref().expect("spatial fixture has fields");
    let xy = sp_ann.coords.as_ref().expect("spatial fixture has coordinates");
    for c in 0..sp.cells.len() {
        let _ = writeln!(l, "{},{},{},{},{}", sp.cells[c], sp_ann.cell_type[c], fov[c], xy[c].0, xy[c].1);
    }
    std::fs::write(dir.join("spatial_labels.csv"), l)?;
    Ok(())
}
