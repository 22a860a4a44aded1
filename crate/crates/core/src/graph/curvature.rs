//! Ollivier-Ricci curvature with exact optimal transport.
//!
//! Each endpoint carries the uniform measure on its neighbours in the
//! symmetrized, unweighted graph (no lazy mass). Scaling both measures by
//! `deg(u) * deg(v)` makes every mass an integer, so the Wasserstein-1 cost is
//! computed exactly by integer min-cost flow and only divided at the end.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use super::DirectedGraph;
use crate::error::{Error, Result};

pub struct CurvatureContext {
    adj: Vec<Vec<usize>>,
}

impl CurvatureContext {
    pub fn new(g: &DirectedGraph) -> Self {
        Self {
            adj: g.undirected_adjacency(),
        }
    }

    fn bfs(&self, source: usize) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.adj.len()];
        let mut queue = VecDeque::from([source]);
        dist[source] = 0;
        while let Some(v) = queue.pop_front() {
            for &w in &self.adj[v] {
                if dist[w] == u32::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    fn check_edge(&self, u: usize, v: usize) -> Result<()> {
        let n = self.adj.len();
        if u >= n || v >= n {
            return Err(Error::InvalidArgument(format!("edge ({u}, {v}) out of range")));
        }
        if self.adj[u].is_empty() || self.adj[v].is_empty() {
            return Err(Error::InvalidArgument(format!("edge ({u}, {v}) has an isolated endpoint")));
        }
        if self.adj[u].binary_search(&v).is_err() {
            return Err(Error::InvalidArgument(format!("({u}, {v}) is not an edge")));
        }
        Ok(())
    }

    fn curvature_from_rows(&self, u: usize, v: usize, rows: &[Vec<u32>]) -> f64 {
        let nu = &self.adj[u];
        let nv = &self.adj[v];
        let (du, dv) = (nu.len() as u64, nv.len() as u64);
        let cost: Vec<Vec<u64>> = rows
            .iter()
            .map(|row| nv.iter().map(|&b| u64::from(row[b])).collect())
            .collect();
        let supply = vec![dv; nu.len()];
        let demand = vec![du; nv.len()];
        let total = transport_cost(&supply, &demand, &cost);
        1.0 - total as f64 / (du * dv) as f64
    }

    /// `1 - W1(m_u, m_v)` for an edge present in either orientation.
    pub fn edge_curvature(&self, u: usize, v: usize) -> Result<f64> {
        self.check_edge(u, v)?;
        let rows: Vec<Vec<u32>> = self.adj[u].iter().map(|&a| self.bfs(a)).collect();
        Ok(self.curvature_from_rows(u, v, &rows))
    }

    /// Curvature of every undirected edge `{u, v}` with `u < v`.
    pub fn all_edge_curvatures(&self) -> Vec<((usize, usize), f64)> {
        let dist: Vec<Vec<u32>> = (0..self.adj.len())
            .map(|s| if self.adj[s].is_empty() { Vec::new() } else { self.bfs(s) })
            .collect();
        let mut out = Vec::new();
        for u in 0..self.adj.len() {
            let rows: Vec<Vec<u32>> = self.adj[u].iter().map(|&a| dist[a].clone()).collect();
            for &v in self.adj[u].iter().filter(|&&v| v > u) {
                out.push(((u, v), self.curvature_from_rows(u, v, &rows)));
            }
        }
        out
    }

    pub fn mean_curvature(&self) -> Result<f64> {
        let all = self.all_edge_curvatures();
        if all.is_empty() {
            return Err(Error::Undefined("curvature of a graph without edges".into()));
        }
        Ok(all.iter().map(|(_, k)| k).sum::<f64>() / all.len() as f64)
    }
}

struct FlowEdge {
    to: usize,
    cap: u64,
    cost: i64,
}

/// Exact minimum cost of moving integer `supply` onto integer `demand`
/// (equal totals) with per-unit costs `cost[i][j]`.
///
/// Successive shortest augmenting paths with Johnson potentials.
pub fn transport_cost(supply: &[u64], demand: &[u64], cost: &[Vec<u64>]) -> u64 {
    let (m, n) = (supply.len(), demand.len());
    debug_assert_eq!(supply.iter().sum::<u64>(), demand.iter().sum::<u64>());
    let source = m + n;
    let sink = m + n + 1;
    let n_nodes = m + n + 2;
    let mut edges: Vec<FlowEdge> = Vec::new();
    let mut graph: Vec<Vec<usize>> = vec![Vec::new(); n_nodes];
    let mut add = |edges: &mut Vec<FlowEdge>, from: usize, to: usize, cap: u64, cost: i64| {
        graph[from].push(edges.len());
        edges.push(FlowEdge { to, cap, cost });
        graph[to].push(edges.len());
        edges.push(FlowEdge { to: from, cap: 0, cost: -cost });
    };
    let total: u64 = supply.iter().sum();
    for (i, &s) in supply.iter().enumerate() {
        add(&mut edges, source, i, s, 0);
    }
    for (i, row) in cost.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            add(&mut edges, i, m + j, total, c as i64);
        }
    }
    for (j, &d) in demand.iter().enumerate() {
        add(&mut edges, m + j, sink, d, 0);
    }

    let mut potential = vec![0i64; n_nodes];
    let mut remaining = total;
    let mut result: i64 = 0;
    let mut dist = vec![i64::MAX; n_nodes];
    let mut prev_edge = vec![usize::MAX; n_nodes];
    while remaining > 0 {
        dist.fill(i64::MAX);
        prev_edge.fill(usize::MAX);
        dist[source] = 0;
        let mut heap = BinaryHeap::from([Reverse((0i64, source))]);
        while let Some(Reverse((d, v))) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            for &ei in &graph[v] {
                let e = &edges[ei];
                if e.cap == 0 {
                    continue;
                }
                let nd = d + e.cost + potential[v] - potential[e.to];
                if nd < dist[e.to] {
                    dist[e.to] = nd;
                    prev_edge[e.to] = ei;
                    heap.push(Reverse((nd, e.to)));
                }
            }
        }
        assert!(dist[sink] != i64::MAX, "transport problem is infeasible");
        for v in 0..n_nodes {
            if dist[v] != i64::MAX {
                potential[v] += dist[v];
            }
        }
        let mut push = remaining;
        let mut v = sink;
        while v != source {
            let ei = prev_edge[v];
            push = push.min(edges[ei].cap);
            v = edges[ei ^ 1].to;
        }
        let mut v = sink;
        while v != source {
            let ei = prev_edge[v];
            edges[ei].cap -= push;
            edges[ei ^ 1].cap += push;
            result += edges[ei].cost * push as i64;
            v = edges[ei ^ 1].to;
        }
        remaining -= push;
    }
    result as u64
}
