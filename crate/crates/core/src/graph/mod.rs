//! Directed graph container, edge-list ingestion and subgraph operations.

mod curvature;
mod io;
mod stats;
mod synthetic;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use curvature::{transport_cost, CurvatureContext};
pub use io::{load_edge_list, parse_edge_list, EdgeFormat, HeaderMode, LoadReport};
pub use stats::GraphStats;
pub use synthetic::hierarchical_graph;

/// A weighted directed edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub weight: f64,
}

/// Immutable directed graph with at most one edge per ordered pair and no
/// self-loops. Edges are kept sorted by `(src, dst)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectedGraph {
    n_vertices: usize,
    edges: Vec<Edge>,
    names: Option<Vec<String>>,
}

/// A subgraph together with the original id of each of its vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Subgraph {
    pub graph: DirectedGraph,
    /// `original_ids[new] = old`, strictly increasing.
    pub original_ids: Vec<usize>,
}

/// How duplicate ordered pairs are merged during construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DuplicatePolicy {
    /// All weights are forced to 1.
    UnitWeight,
    /// Weights of repeated pairs are summed.
    Sum,
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct BuildReport {
    pub self_loops_dropped: usize,
    pub duplicates_merged: usize,
}

impl DirectedGraph {
    /// Builds a graph from raw `(src, dst, weight)` triples, dropping
    /// self-loops and merging duplicates.
    pub fn from_edges<I>(n_vertices: usize, edges: I, policy: DuplicatePolicy) -> Result<(Self, BuildReport)>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut report = BuildReport::default();
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (src, dst, weight) in edges {
            if src >= n_vertices || dst >= n_vertices {
                return Err(Error::InvalidArgument(format!(
                    "edge ({src}, {dst}) out of range for {n_vertices} vertices"
                )));
            }
            if !(weight.is_finite() && weight >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "edge ({src}, {dst}) has invalid weight {weight}"
                )));
            }
            if src == dst {
                report.self_loops_dropped += 1;
                continue;
            }
            let w = match policy {
                DuplicatePolicy::UnitWeight => 1.0,
                DuplicatePolicy::Sum => weight,
            };
            match merged.get_mut(&(src, dst)) {
                Some(existing) => {
                    report.duplicates_merged += 1;
                    if policy == DuplicatePolicy::Sum {
                        *existing += w;
                    }
                }
                None => {
                    merged.insert((src, dst), w);
                }
            }
        }
        let edges = merged
            .into_iter()
            .map(|((src, dst), weight)| Edge { src, dst, weight })
            .collect();
        Ok((
            Self {
                n_vertices,
                edges,
                names: None,
            },
            report,
        ))
    }

    /// Unit-weight graph from ordered pairs; panics on out-of-range ids.
    /// Intended for tests and fixtures.
    pub fn from_pairs(n_vertices: usize, pairs: &[(usize, usize)]) -> Self {
        Self::from_edges(
            n_vertices,
            pairs.iter().map(|&(s, d)| (s, d, 1.0)),
            DuplicatePolicy::UnitWeight,
        )
        .expect("valid edge list")
        .0
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n_vertices {
            return Err(Error::Dimension(format!(
                "{} names for {} vertices",
                names.len(),
                self.n_vertices
            )));
        }
        self.names = Some(names);
        Ok(self)
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    /// Display name of a vertex: its interned name, or its id.
    pub fn vertex_label(&self, v: usize) -> String {
        match &self.names {
            Some(names) => names[v].clone(),
            None => v.to_string(),
        }
    }

    pub fn vertex_by_name(&self, name: &str) -> Option<usize> {
        self.names.as_ref()?.iter().position(|n| n == name)
    }

    pub fn has_edge(&self, src: usize, dst: usize) -> bool {
        self.edges
            .binary_search_by(|e| (e.src, e.dst).cmp(&(src, dst)))
            .is_ok()
    }

    /// Out-neighbour lists.
    pub fn out_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_vertices];
        for e in &self.edges {
            adj[e.src].push(e.dst);
        }
        adj
    }

    /// Sorted neighbour lists of the symmetrized, unweighted graph.
    pub fn undirected_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_vertices];
        for e in &self.edges {
            adj[e.src].push(e.dst);
            adj[e.dst].push(e.src);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    /// The graph with the reverse of every edge added, all weights 1.
    pub fn symmetrized(&self) -> Self {
        let pairs = self
            .edges
            .iter()
            .flat_map(|e| [(e.src, e.dst, 1.0), (e.dst, e.src, 1.0)]);
        let (mut g, _) = Self::from_edges(self.n_vertices, pairs, DuplicatePolicy::UnitWeight)
            .expect("edges already validated");
        g.names = self.names.clone();
        g
    }

    /// Weakly connected components as vertex lists, each sorted ascending,
    /// ordered by their smallest vertex.
    pub fn weak_components(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.n_vertices).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for e in &self.edges {
            let a = find(&mut parent, e.src);
            let b = find(&mut parent, e.dst);
            if a != b {
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                parent[hi] = lo;
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in 0..self.n_vertices {
            let root = find(&mut parent, v);
            groups.entry(root).or_default().push(v);
        }
        groups.into_values().collect()
    }

    pub fn is_weakly_connected(&self) -> bool {
        self.n_vertices > 0 && self.weak_components().len() == 1
    }

    /// Induced subgraph on the largest weakly connected component. Ties go
    /// to the component containing the smallest vertex id.
    pub fn largest_connected_component(&self) -> Subgraph {
        let components = self.weak_components();
        let mut best: Option<&Vec<usize>> = None;
        for comp in &components {
            // components are ordered by minimum id, so strict `>` keeps the tie-break
            if best.is_none_or(|b| comp.len() > b.len()) {
                best = Some(comp);
            }
        }
        let keep = best.cloned().unwrap_or_default();
        self.induced_unchecked(&keep)
    }

    /// Subgraph keeping exactly the edges with both endpoints in `vertices`.
    /// Vertices are re-indexed in ascending order of their original id.
    pub fn induced_subgraph(&self, vertices: &[usize]) -> Result<Subgraph> {
        if let Some(&bad) = vertices.iter().find(|&&v| v >= self.n_vertices) {
            return Err(Error::InvalidArgument(format!(
                "vertex {bad} out of range for {} vertices",
                self.n_vertices
            )));
        }
        let mut keep = vertices.to_vec();
        keep.sort_unstable();
        keep.dedup();
        Ok(self.induced_unchecked(&keep))
    }

    fn induced_unchecked(&self, keep: &[usize]) -> Subgraph {
        let mut new_id = vec![usize::MAX; self.n_vertices];
        for (i, &v) in keep.iter().enumerate() {
            new_id[v] = i;
        }
        let edges: Vec<Edge> = self
            .edges
            .iter()
            .filter(|e| new_id[e.src] != usize::MAX && new_id[e.dst] != usize::MAX)
            .map(|e| Edge {
                src: new_id[e.src],
                dst: new_id[e.dst],
                weight: e.weight,
            })
            .collect();
        let names = self
            .names
            .as_ref()
            .map(|names| keep.iter().map(|&v| names[v].clone()).collect());
        // relabeling is monotone, so the (src, dst) order is preserved
        Subgraph {
            graph: DirectedGraph {
                n_vertices: keep.len(),
                edges,
                names,
            },
            original_ids: keep.to_vec(),
        }
    }

    /// Relabels vertex `v` as `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n_vertices {
            return Err(Error::Dimension(format!(
                "permutation of length {} for {} vertices",
                perm.len(),
                self.n_vertices
            )));
        }
        let (mut g, _) = Self::from_edges(
            self.n_vertices,
            self.edges.iter().map(|e| (perm[e.src], perm[e.dst], e.weight)),
            DuplicatePolicy::Sum,
        )?;
        if let Some(names) = &self.names {
            let mut renamed = vec![String::new(); names.len()];
            for (v, name) in names.iter().enumerate() {
                renamed[perm[v]] = name.clone();
            }
            g.names = Some(renamed);
        }
        Ok(g)
    }

    /// Graph with the same vertices and only the given edges (which must be
    /// edges of `self`).
    pub fn with_edge_subset(&self, edges: &[Edge]) -> Self {
        let mut edges = edges.to_vec();
        edges.sort_by_key(|a| (a.src, a.dst));
        edges.dedup_by(|a, b| a.src == b.src && a.dst == b.dst);
        Self {
            n_vertices: self.n_vertices,
            edges,
            names: self.names.clone(),
        }
    }

    /// Fraction of directed edges whose reverse edge is also present.
    pub fn reciprocity(&self) -> Result<f64> {
        stats::reciprocity(self)
    }

    /// Krackhardt hierarchy score over transitive-closure reachability.
    pub fn krackhardt_hierarchy(&self) -> Result<f64> {
        stats::krackhardt_hierarchy(self)
    }

    /// Ollivier-Ricci curvature of one edge on the symmetrized graph.
    pub fn ollivier_ricci_edge(&self, u: usize, v: usize) -> Result<f64> {
        CurvatureContext::new(self).edge_curvature(u, v)
    }

    /// Mean Ollivier-Ricci curvature over the undirected edges.
    pub fn mean_ollivier_ricci(&self) -> Result<f64> {
        CurvatureContext::new(self).mean_curvature()
    }

    pub fn stats(&self) -> Result<GraphStats> {
        GraphStats::compute(self)
    }
}
