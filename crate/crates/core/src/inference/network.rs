use std::collections::{BTreeSet, HashMap};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::markers::MarkerSets;
use crate::dsae::{train, DsaeConfig, Geometry, NodeEmbeddings, NodeLabels, TrainingLog};
use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::linkpred::{DirectionScorer, EdgeFeature};

/// Prior-network subgraph on the marker genes of two cell types.
#[derive(Debug, Clone, PartialEq)]
pub struct CellTypeGraph {
    /// Largest connected component, vertices named by gene.
    pub graph: DirectedGraph,
    /// 0 for the first cell type, 1 for the second.
    pub celltype_of: Vec<usize>,
    pub intercellular: Vec<bool>,
    pub type_names: [String; 2],
}

impl CellTypeGraph {
    pub fn gene(&self, v: usize) -> String {
        self.graph.vertex_label(v)
    }
}

/// Induced subgraph of `prior` on the marker genes, restricted to its
/// largest connected component. A vertex is intercellular when annotated so
/// and adjacent (either direction) to a gene of the other type.
pub fn build_celltype_graph(
    prior: &DirectedGraph,
    markers: &MarkerSets,
    annotation: &HashMap<String, bool>,
) -> Result<CellTypeGraph> {
    if prior.names().is_none() {
        return Err(Error::InvalidArgument("prior network vertices must be named by gene".into()));
    }
    let mut side: HashMap<usize, usize> = HashMap::new();
    for (t, genes) in [&markers.genes_i, &markers.genes_j].into_iter().enumerate() {
        for g in genes {
            if let Some(v) = prior.vertex_by_name(g) {
                if side.insert(v, t).is_some() {
                    return Err(Error::InvalidArgument(format!("gene `{g}` is a marker of both types")));
                }
            }
        }
    }
    if side.is_empty() {
        return Err(Error::Empty("no marker gene occurs in the prior network".into()));
    }
    let mut vertices: Vec<usize> = side.keys().copied().collect();
    vertices.sort_unstable();
    let induced = prior.induced_subgraph(&vertices)?;
    let lcc = induced.graph.largest_connected_component();
    let graph = lcc.graph;
    let celltype_of: Vec<usize> = lcc
        .original_ids
        .iter()
        .map(|&v| side[&induced.original_ids[v]])
        .collect();
    let adj = graph.undirected_adjacency();
    let intercellular: Vec<bool> = (0..graph.n_vertices())
        .map(|v| {
            annotation.get(&graph.vertex_label(v)).copied().unwrap_or(false)
                && adj[v].iter().any(|&u| celltype_of[u] != celltype_of[v])
        })
        .collect();
    if celltype_of.iter().all(|&t| t == celltype_of[0]) {
        log::warn!("cell-type graph lies within a single cell type; no cross-type edges in the prior");
    }
    Ok(CellTypeGraph {
        graph,
        celltype_of,
        intercellular,
        type_names: [markers.type_i.clone(), markers.type_j.clone()],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    PriorSupported,
    DeNovo,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::PriorSupported => "prior-supported",
            Provenance::DeNovo => "de-novo",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferredEdge {
    pub src: usize,
    pub dst: usize,
    pub confidence: f64,
    pub provenance: Provenance,
}

/// Serializes to JSON with vertex names and cell types, which is the form
/// read back by spatial validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferredNetwork {
    pub edges: Vec<InferredEdge>,
    pub names: Vec<String>,
    pub celltype_of: Vec<usize>,
    pub type_names: [String; 2],
}

impl InferredNetwork {
    pub fn contains(&self, src: &str, dst: &str) -> bool {
        self.edges
            .iter()
            .any(|e| self.names[e.src] == src && self.names[e.dst] == dst)
    }

    /// CSV `src,dst,confidence,provenance`, preceded by `# ` comment lines.
    pub fn write_csv<W: Write>(&self, out: &mut W, preamble: &[String]) -> Result<()> {
        for line in preamble {
            writeln!(out, "# {line}")?;
        }
        writeln!(out, "src,dst,confidence,provenance")?;
        for e in &self.edges {
            writeln!(
                out,
                "{},{},{},{}",
                self.names[e.src],
                self.names[e.dst],
                e.confidence,
                e.provenance.as_str()
            )?;
        }
        Ok(())
    }

    /// Graphviz digraph with nodes colored by cell type and de novo edges
    /// dashed.
    pub fn write_dot<W: Write>(&self, out: &mut W) -> Result<()> {
        const COLORS: [&str; 2] = ["#8dd3c7", "#fb8072"];
        writeln!(out, "digraph inferred {{")?;
        for (v, name) in self.names.iter().enumerate() {
            let t = self.celltype_of[v];
            writeln!(
                out,
                "  \"{name}\" [style=filled, fillcolor=\"{}\", tooltip=\"{}\"];",
                COLORS[t], self.type_names[t]
            )?;
        }
        for e in &self.edges {
            let style = match e.provenance {
                Provenance::PriorSupported => "solid",
                Provenance::DeNovo => "dashed",
            };
            writeln!(
                out,
                "  \"{}\" -> \"{}\" [style={style}, label=\"{:.3}\"];",
                self.names[e.src], self.names[e.dst], e.confidence
            )?;
        }
        writeln!(out, "}}")?;
        Ok(())
    }

    pub fn save(&self, csv_path: &Path, dot_path: &Path, preamble: &[String]) -> Result<()> {
        let mut csv = std::io::BufWriter::new(std::fs::File::create(csv_path)?);
        self.write_csv(&mut csv, preamble)?;
        csv.flush()?;
        let mut dot = std::io::BufWriter::new(std::fs::File::create(dot_path)?);
        self.write_dot(&mut dot)?;
        dot.flush()?;
        Ok(())
    }
}

/// Undirected pairs `u < v` where either endpoint is among the `k` nearest
/// neighbours of the other. Distance ties break by vertex index.
pub fn knn_union_pairs(emb: &NodeEmbeddings, k: usize) -> Result<Vec<(usize, usize)>> {
    let n = emb.n();
    if k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!("k must be in 1..{n}, got {k}")));
    }
    let mut pairs = BTreeSet::new();
    for v in 0..n {
        let mut others: Vec<(f64, usize)> = (0..n).filter(|&u| u != v).map(|u| (emb.distance(v, u), u)).collect();
        others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(_, u) in &others[..k] {
            pairs.insert((u.min(v), u.max(v)));
        }
    }
    Ok(pairs.into_iter().collect())
}

/// Proposes kNN edges in the embedding and orients each with a direction
/// scorer fitted on the edges of `graph`.
pub fn orient_knn_edges(graph: &DirectedGraph, emb: &NodeEmbeddings, k: usize) -> Result<Vec<InferredEdge>> {
    if emb.n() != graph.n_vertices() {
        return Err(Error::Dimension(format!(
            "{} embeddings for {} vertices",
            emb.n(),
            graph.n_vertices()
        )));
    }
    let pairs = knn_union_pairs(emb, k)?;
    let z = emb.tangent();
    let scorer = DirectionScorer::fit(&z.view(), graph, EdgeFeature::Concat)?;
    Ok(pairs
        .into_iter()
        .map(|(u, v)| {
            let (s_uv, s_vu) = (scorer.score(&z.view(), u, v), scorer.score(&z.view(), v, u));
            let (src, dst, confidence) = if s_uv >= s_vu { (u, v, s_uv) } else { (v, u, s_vu) };
            let provenance = if graph.has_edge(src, dst) {
                Provenance::PriorSupported
            } else {
                Provenance::DeNovo
            };
            InferredEdge {
                src,
                dst,
                confidence,
                provenance,
            }
        })
        .collect())
}

/// Autoencoder settings used for network inference: Euclidean geometry and
/// loss weights `(α, β, γ) = (10, 5, 1)`.
pub fn inference_defaults() -> DsaeConfig {
    DsaeConfig {
        geometry: Geometry::Euclidean,
        alpha: 10.0,
        beta: 5.0,
        gamma: 1.0,
        ..DsaeConfig::default()
    }
}

pub const DEFAULT_K: usize = 5;

#[derive(Debug, Clone)]
pub struct InferenceOutput {
    pub network: InferredNetwork,
    pub embeddings: NodeEmbeddings,
    pub log: TrainingLog,
}

/// Trains the regularized autoencoder on `ctg` (cell type and
/// intercellular flag as contrastive targets) and orients kNN edges of the
/// resulting embedding.
pub fn infer_network(ctg: &CellTypeGraph, cfg: &DsaeConfig, k: usize) -> Result<InferenceOutput> {
    let n = ctg.graph.n_vertices();
    if k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!("k must be in 1..{n}, got {k}")));
    }
    let labels = NodeLabels {
        intracellular: Some(ctg.celltype_of.clone()),
        intercellular: Some(ctg.intercellular.iter().map(|&f| usize::from(f)).collect()),
    };
    let trained = train(&ctg.graph, cfg, Some(&labels))?;
    let edges = orient_knn_edges(&ctg.graph, &trained.embeddings, k)?;
    Ok(InferenceOutput {
        network: InferredNetwork {
            edges,
            names: (0..n).map(|v| ctg.gene(v)).collect(),
            celltype_of: ctg.celltype_of.clone(),
            type_names: ctg.type_names.clone(),
        },
        embeddings: trained.embeddings,
        log: trained.log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("g{i}")).collect()
    }

    fn markers(i: &[&str], j: &[&str]) -> MarkerSets {
        MarkerSets {
            type_i: "A".into(),
            type_j: "B".into(),
            genes_i: i.iter().map(|s| s.to_string()).collect(),
            genes_j: j.iter().map(|s| s.to_string()).collect(),
            tests: Vec::new(),
        }
    }

    #[test]
    fn one_cross_edge_flags_its_endpoints() {
        // g0-g1-g2 type A, g3-g4-g5 type B, cross edge g2 -> g3
        let prior = DirectedGraph::from_pairs(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)])
            .with_names(names(6))
            .unwrap();
        let ann: HashMap<String, bool> = names(6).into_iter().map(|g| (g, true)).collect();
        let ctg = build_celltype_graph(&prior, &markers(&["g0", "g1", "g2"], &["g3", "g4", "g5"]), &ann).unwrap();
        let flagged: Vec<String> = (0..6).filter(|&v| ctg.intercellular[v]).map(|v| ctg.gene(v)).collect();
        assert_eq!(flagged, vec!["g2", "g3"]);
        let none: HashMap<String, bool> = HashMap::new();
        let ctg = build_celltype_graph(&prior, &markers(&["g0", "g1", "g2"], &["g3", "g4", "g5"]), &none).unwrap();
        assert!(ctg.intercellular.iter().all(|f| !f));
    }

    #[test]
    fn missing_genes_and_single_type_component() {
        let prior = DirectedGraph::from_pairs(4, &[(0, 1), (2, 3)]).with_names(names(4)).unwrap();
        assert!(build_celltype_graph(&prior, &markers(&["x"], &["y"]), &HashMap::new()).is_err());
        let ctg = build_celltype_graph(&prior, &markers(&["g0", "g1"], &["g2"]), &HashMap::new()).unwrap();
        assert!(ctg.celltype_of.iter().all(|&t| t == 0));
    }

    fn euclid(matrix: Array2<f64>) -> NodeEmbeddings {
        let n = matrix.nrows();
        NodeEmbeddings {
            matrix,
            geometry: Geometry::Euclidean,
            curvature: 1.0,
            names: names(n),
        }
    }

    #[test]
    fn knn_union_rule() {
        // 2 is the nearest neighbour of 3, but 3 is not the nearest of 2
        let emb = euclid(array![[0.0], [1.0], [2.0], [3.5]]);
        let pairs = knn_union_pairs(&emb, 1).unwrap();
        assert_eq!(pairs, vec![(0, 1), (1, 2), (2, 3)]);
        assert!(knn_union_pairs(&emb, 4).is_err());
        let two = euclid(array![[0.0], [1.0]]);
        assert_eq!(knn_union_pairs(&two, 1).unwrap(), vec![(0, 1)]);
    }

    #[test]
    fn orientation_is_exclusive() {
        let g = DirectedGraph::from_pairs(4, &[(0, 1), (1, 2), (2, 3)]);
        let emb = euclid(array![[0.0, 0.1], [1.0, 0.0], [2.0, 0.2], [3.0, 0.1]]);
        let edges = orient_knn_edges(&g, &emb, 2).unwrap();
        let mut seen = BTreeSet::new();
        for e in &edges {
            assert!(seen.insert((e.src.min(e.dst), e.src.max(e.dst))));
            assert!(e.confidence >= 0.5 && e.confidence < 1.0);
            assert_ne!(e.src, e.dst);
        }
        assert!(edges.iter().any(|e| (e.src, e.dst) == (0, 1) && e.provenance == Provenance::PriorSupported));
    }
}
