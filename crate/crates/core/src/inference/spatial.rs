use std::collections::{BTreeSet, HashMap};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::expression::{CellAnnotations, ExpressionMatrix};
use super::network::InferredNetwork;
use super::stats::{ks_test_one_sided, mutual_information};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpatialOptions {
    pub bins: usize,
    /// Upper bound on the number of close cell pairs used per gene pair.
    pub max_cell_pairs: usize,
    /// Number of random cross-type gene pairs forming the null sample.
    pub random_gene_pairs: usize,
    pub seed: u64,
}

impl Default for SpatialOptions {
    fn default() -> Self {
        Self {
            bins: 8,
            max_cell_pairs: 100_000,
            random_gene_pairs: 200,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpatialReport {
    /// Cross-type network edges whose genes are both on the panel.
    pub tested_pairs: Vec<(String, String)>,
    pub missing_genes: Vec<String>,
    /// Set when the network has no testable cross-type edge.
    pub no_pairs: bool,
    pub close_cell_pairs: usize,
    pub distant_cell_pairs: usize,
    pub network_close_mi: Vec<f64>,
    pub network_distant_mi: Vec<f64>,
    pub random_close_mi: Vec<f64>,
    /// Network pairs in close cells against random gene pairs in close cells.
    pub ks_network_vs_random: Option<KsResult>,
    /// Network pairs in close cells against the same pairs in distant cells.
    pub ks_close_vs_distant: Option<KsResult>,
}

/// Reservoir sample of at most `cap` items from an iterator.
fn reservoir<T, I: Iterator<Item = T>>(iter: I, cap: usize, rng: &mut ChaCha8Rng) -> Vec<T> {
    let mut out = Vec::new();
    for (seen, item) in iter.enumerate() {
        if out.len() < cap {
            out.push(item);
        } else {
            let r = rng.gen_range(0..=seen);
            if r < cap {
                out[r] = item;
            }
        }
    }
    out
}

fn mi_over(expr: &ExpressionMatrix, pairs: &[(usize, usize)], g_a: usize, g_b: usize, bins: usize) -> Result<f64> {
    let x: Vec<f64> = pairs.iter().map(|&(a, _)| expr.values[[a, g_a]]).collect();
    let y: Vec<f64> = pairs.iter().map(|&(_, b)| expr.values[[b, g_b]]).collect();
    mutual_information(&x, &y, bins)
}

/// Compares the co-variation of inferred cross-type gene pairs between
/// neighbouring cells (same field of view) with random gene pairs and with
/// cells in different fields of view. MI is computed over cell pairs
/// `(a, b)` where `a` has the source gene's type and `b` the target's.
pub fn validate_spatial(
    network: &InferredNetwork,
    expr: &ExpressionMatrix,
    ann: &CellAnnotations,
    opts: &SpatialOptions,
) -> Result<SpatialReport> {
    let fov = ann
        .fov
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("spatial annotations need a field-of-view column".into()))?;
    if fov.len() != expr.cells.len() {
        return Err(Error::Dimension("annotations do not match expression rows".into()));
    }
    if fov.iter().collect::<BTreeSet<_>>().len() < 2 {
        return Err(Error::InvalidArgument("spatial validation needs at least 2 fields of view".into()));
    }
    if opts.bins == 0 || opts.max_cell_pairs == 0 {
        return Err(Error::InvalidArgument("bins and max_cell_pairs must be >= 1".into()));
    }
    let [type_i, type_j] = &network.type_names;
    let cells_i = ann.cells_of_type(type_i);
    let cells_j = ann.cells_of_type(type_j);
    if cells_i.is_empty() || cells_j.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "spatial data lacks cells of type `{type_i}` or `{type_j}`"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    // (cell of type i, cell of type j)
    let close_iter = cells_i
        .iter()
        .flat_map(|&a| cells_j.iter().filter(move |&&b| fov[a] == fov[b]).map(move |&b| (a, b)));
    let close = reservoir(close_iter, opts.max_cell_pairs, &mut rng);
    if close.len() < opts.bins {
        return Err(Error::InvalidArgument(format!(
            "only {} same-field cross-type cell pairs; need at least {}",
            close.len(),
            opts.bins
        )));
    }
    let distant_total: usize = cells_i
        .iter()
        .map(|&a| cells_j.iter().filter(|&&b| fov[a] != fov[b]).count())
        .sum();
    let want = close.len().min(distant_total);
    let mut distant = Vec::with_capacity(want);
    if want == distant_total {
        distant.extend(
            cells_i
                .iter()
                .flat_map(|&a| cells_j.iter().filter(move |&&b| fov[a] != fov[b]).map(move |&b| (a, b))),
        );
    } else {
        let mut taken = BTreeSet::new();
        while distant.len() < want {
            let a = cells_i[rng.gen_range(0..cells_i.len())];
            let b = cells_j[rng.gen_range(0..cells_j.len())];
            if fov[a] != fov[b] && taken.insert((a, b)) {
                distant.push((a, b));
            }
        }
    }
    let swap = |v: &[(usize, usize)]| -> Vec<(usize, usize)> { v.iter().map(|&(a, b)| (b, a)).collect() };
    let (close_ji, distant_ji) = (swap(&close), swap(&distant));

    let mut report = SpatialReport {
        tested_pairs: Vec::new(),
        missing_genes: Vec::new(),
        no_pairs: false,
        close_cell_pairs: close.len(),
        distant_cell_pairs: distant.len(),
        network_close_mi: Vec::new(),
        network_distant_mi: Vec::new(),
        random_close_mi: Vec::new(),
        ks_network_vs_random: None,
        ks_close_vs_distant: None,
    };
    let mut missing = BTreeSet::new();
    for e in &network.edges {
        let (ts, td) = (network.celltype_of[e.src], network.celltype_of[e.dst]);
        if ts == td {
            continue;
        }
        let (gs, gd) = (&network.names[e.src], &network.names[e.dst]);
        let (Some(a), Some(b)) = (expr.gene_index(gs), expr.gene_index(gd)) else {
            for g in [gs, gd] {
                if expr.gene_index(g).is_none() {
                    missing.insert(g.clone());
                }
            }
            continue;
        };
        let (c, d) = if ts == 0 { (&close, &distant) } else { (&close_ji, &distant_ji) };
        report.network_close_mi.push(mi_over(expr, c, a, b, opts.bins)?);
        report.network_distant_mi.push(mi_over(expr, d, a, b, opts.bins)?);
        report.tested_pairs.push((gs.clone(), gd.clone()));
    }
    report.missing_genes = missing.into_iter().collect();
    if !report.missing_genes.is_empty() {
        log::warn!("{} network genes absent from the spatial panel", report.missing_genes.len());
    }

    let n_genes = expr.genes.len();
    if n_genes >= 2 {
        for _ in 0..opts.random_gene_pairs {
            let pick = sample(&mut rng, n_genes, 2);
            report.random_close_mi.push(mi_over(expr, &close, pick.index(0), pick.index(1), opts.bins)?);
        }
    }

    if report.tested_pairs.is_empty() {
        report.no_pairs = true;
        log::warn!("no cross-type network edge can be tested on the spatial panel");
        return Ok(report);
    }
    let ks = |high: &[f64], low: &[f64]| -> Result<Option<KsResult>> {
        if low.is_empty() {
            return Ok(None);
        }
        let (statistic, p_value) = ks_test_one_sided(high, low)?;
        Ok(Some(KsResult { statistic, p_value }))
    };
    report.ks_network_vs_random = ks(&report.network_close_mi, &report.random_close_mi)?;
    report.ks_close_vs_distant = ks(&report.network_close_mi, &report.network_distant_mi)?;
    Ok(report)
}

/// Counts of cells per field of view.
pub fn fov_sizes(ann: &CellAnnotations) -> HashMap<String, usize> {
    let mut out = HashMap::new();
    for f in ann.fov.iter().flatten() {
        *out.entry(f.clone()).or_insert(0) += 1;
    }
    out
}
