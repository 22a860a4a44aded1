use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, Edge};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitRatios {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self {
            train: 0.85,
            val: 0.05,
            test: 0.10,
        }
    }
}

impl SplitRatios {
    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.val, self.test];
        if parts.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::Config(format!("split ratios must be >= 0: {self:?}")));
        }
        if (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("split ratios must sum to 1: {self:?}")));
        }
        Ok(())
    }
}

/// An orientation query: `label` is true when `src -> dst` is the true edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalPair {
    pub src: usize,
    pub dst: usize,
    pub label: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSplit {
    /// All vertices of the input graph with the training edges only.
    pub train_graph: DirectedGraph,
    /// Held-out true edges.
    pub val_edges: Vec<Edge>,
    pub test_edges: Vec<Edge>,
    pub val_pairs: Vec<EvalPair>,
    pub test_pairs: Vec<EvalPair>,
    /// Spanning-tree edges forced into training.
    pub skeleton_edges: usize,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn pairs_of(edges: &[Edge]) -> Vec<EvalPair> {
    edges
        .iter()
        .flat_map(|e| {
            [
                EvalPair {
                    src: e.src,
                    dst: e.dst,
                    label: true,
                },
                EvalPair {
                    src: e.dst,
                    dst: e.src,
                    label: false,
                },
            ]
        })
        .collect()
}

/// Train/val/test edge split whose training part contains a uniformly
/// random spanning tree (random weights, then Kruskal) of the symmetrized
/// graph. Bidirectional pairs always stay in training since their
/// orientation is undefined. Each held-out edge `(u, v)` yields the pairs
/// `(u, v, true)` and `(v, u, false)`.
pub fn split_edges(g: &DirectedGraph, ratios: SplitRatios, seed: u64) -> Result<EdgeSplit> {
    ratios.validate()?;
    let m = g.n_edges();
    if m == 0 {
        return Err(Error::Empty("graph has no edges to split".into()));
    }
    if !g.is_weakly_connected() {
        return Err(Error::InvalidArgument("edge split needs a connected graph".into()));
    }
    let n_train = (ratios.train * m as f64).round() as usize;
    let n_val = ((ratios.val * m as f64).round() as usize).min(m - n_train.min(m));
    let n_test = m - n_train.min(m) - n_val;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = g.edges();
    let bidirectional = |e: &Edge| g.has_edge(e.dst, e.src);

    // undirected pairs with random weights
    let mut undirected: Vec<(f64, usize, usize)> = edges
        .iter()
        .filter(|e| e.src < e.dst || !g.has_edge(e.dst, e.src))
        .map(|e| (rng.gen::<f64>(), e.src.min(e.dst), e.src.max(e.dst)))
        .collect();
    undirected.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut parent: Vec<usize> = (0..g.n_vertices()).collect();
    let mut tree: HashSet<(usize, usize)> = HashSet::new();
    for &(_, u, v) in &undirected {
        let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
        if ru != rv {
            parent[ru] = rv;
            tree.insert((u, v));
        }
    }

    let mut required = Vec::new();
    let mut candidates = Vec::new();
    for e in edges {
        let key = (e.src.min(e.dst), e.src.max(e.dst));
        if bidirectional(e) || tree.contains(&key) {
            required.push(*e);
        } else {
            candidates.push(*e);
        }
    }
    if required.len() > n_train {
        return Err(Error::InfeasibleSplit(format!(
            "train ratio {} keeps {n_train} of {m} edges, but the spanning tree and bidirectional edges need {} (minimum feasible train ratio {:.4})",
            ratios.train,
            required.len(),
            required.len() as f64 / m as f64
        )));
    }
    candidates.shuffle(&mut rng);
    let extra = n_train - required.len();
    let mut train = required.clone();
    train.extend_from_slice(&candidates[..extra]);
    let mut held = candidates[extra..].to_vec();
    held.shuffle(&mut rng);
    let test_edges = held.split_off(n_val);
    let val_edges = held;
    debug_assert_eq!(test_edges.len(), n_test);

    Ok(EdgeSplit {
        train_graph: g.with_edge_subset(&train),
        val_pairs: pairs_of(&val_edges),
        test_pairs: pairs_of(&test_edges),
        val_edges,
        test_edges,
        skeleton_edges: tree.len(),
    })
}
