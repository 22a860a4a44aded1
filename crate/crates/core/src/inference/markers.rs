use serde::Serialize;

use super::expression::{CellAnnotations, ExpressionMatrix};
use super::stats::wilcoxon_rank_sum;
use crate::error::{Error, Result};

pub const LFC_PSEUDOCOUNT: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneTest {
    pub gene: String,
    /// `log2((mean_i + ε) / (mean_j + ε))`
    pub log2_fold_change: f64,
    pub p_value: f64,
}

/// Disjoint marker gene sets of two cell types.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarkerSets {
    pub type_i: String,
    pub type_j: String,
    pub genes_i: Vec<String>,
    pub genes_j: Vec<String>,
    pub tests: Vec<GeneTest>,
}

/// Genes with `log2` fold change above `lfc_threshold` and rank-sum p-value
/// below `p_threshold` in one type relative to the other.
pub fn select_marker_genes(
    expr: &ExpressionMatrix,
    ann: &CellAnnotations,
    type_i: &str,
    type_j: &str,
    lfc_threshold: f64,
    p_threshold: f64,
) -> Result<MarkerSets> {
    if !(lfc_threshold > 0.0 && p_threshold > 0.0) {
        return Err(Error::InvalidArgument("marker thresholds must be positive".into()));
    }
    if ann.cell_type.len() != expr.cells.len() {
        return Err(Error::Dimension("annotations do not match expression rows".into()));
    }
    let cells_i = ann.cells_of_type(type_i);
    let cells_j = ann.cells_of_type(type_j);
    for (t, cells) in [(type_i, &cells_i), (type_j, &cells_j)] {
        if cells.is_empty() {
            return Err(Error::InvalidArgument(format!("cell type `{t}` not present")));
        }
        if cells.len() < 3 {
            return Err(Error::InvalidArgument(format!("cell type `{t}` has fewer than 3 cells")));
        }
    }
    let mut out = MarkerSets {
        type_i: type_i.to_string(),
        type_j: type_j.to_string(),
        genes_i: Vec::new(),
        genes_j: Vec::new(),
        tests: Vec::new(),
    };
    for (g, gene) in expr.genes.iter().enumerate() {
        let col = expr.values.column(g);
        let a: Vec<f64> = cells_i.iter().map(|&c| col[c]).collect();
        let b: Vec<f64> = cells_j.iter().map(|&c| col[c]).collect();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let lfc = ((mean(&a) + LFC_PSEUDOCOUNT) / (mean(&b) + LFC_PSEUDOCOUNT)).log2();
        let (_, p) = wilcoxon_rank_sum(&a, &b)?;
        if p < p_threshold {
            if lfc > lfc_threshold {
                out.genes_i.push(gene.clone());
            } else if -lfc > lfc_threshold {
                out.genes_j.push(gene.clone());
            }
        }
        out.tests.push(GeneTest {
            gene: gene.clone(),
            log2_fold_change: lfc,
            p_value: p,
        });
    }
    Ok(out)
}
