use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::DirectedGraph;
use crate::error::{Error, Result};

/// Directionality and hierarchy diagnostics of a directed graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub n_vertices: usize,
    pub n_edges: usize,
    pub reciprocity: f64,
    pub khs: f64,
    pub mean_orc: f64,
}

impl GraphStats {
    pub fn compute(g: &DirectedGraph) -> Result<Self> {
        Ok(Self {
            n_vertices: g.n_vertices(),
            n_edges: g.n_edges(),
            reciprocity: reciprocity(g)?,
            khs: krackhardt_hierarchy(g)?,
            mean_orc: g.mean_ollivier_ricci()?,
        })
    }
}

pub(super) fn reciprocity(g: &DirectedGraph) -> Result<f64> {
    if g.n_edges() == 0 {
        return Err(Error::Undefined("reciprocity of a graph without edges".into()));
    }
    let reciprocated = g.edges().iter().filter(|e| g.has_edge(e.dst, e.src)).count();
    Ok(reciprocated as f64 / g.n_edges() as f64)
}

/// Reachability sets (excluding the start vertex unless it lies on a cycle)
/// as packed bitsets, one BFS per vertex.
fn reachability(g: &DirectedGraph) -> Vec<Vec<u64>> {
    let n = g.n_vertices();
    let words = n.div_ceil(64);
    let adj = g.out_adjacency();
    let mut out = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    for s in 0..n {
        let mut seen = vec![0u64; words];
        queue.clear();
        for &w in &adj[s] {
            if seen[w / 64] & (1 << (w % 64)) == 0 {
                seen[w / 64] |= 1 << (w % 64);
                queue.push_back(w);
            }
        }
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if seen[w / 64] & (1 << (w % 64)) == 0 {
                    seen[w / 64] |= 1 << (w % 64);
                    queue.push_back(w);
                }
            }
        }
        out.push(seen);
    }
    out
}

pub(super) fn krackhardt_hierarchy(g: &DirectedGraph) -> Result<f64> {
    if g.n_edges() == 0 {
        return Err(Error::Undefined("hierarchy score of a graph without edges".into()));
    }
    let reach = reachability(g);
    let bit = |u: usize, v: usize| reach[u][v / 64] & (1 << (v % 64)) != 0;
    let mut reachable = 0u64;
    let mut one_way = 0u64;
    for u in 0..g.n_vertices() {
        for v in 0..g.n_vertices() {
            if u != v && bit(u, v) {
                reachable += 1;
                if !bit(v, u) {
                    one_way += 1;
                }
            }
        }
    }
    Ok(one_way as f64 / reachable as f64)
}
