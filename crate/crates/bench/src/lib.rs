//! Shared workloads for the criterion benches.

use dsae_core::graph::hierarchical_graph;
use dsae_core::{DirectedGraph, DsaeConfig, Geometry};

/// Vertex counts benchmarked; 183 matches the small web graphs.
pub const SIZES: [usize; 3] = [50, 183, 400];

/// Connected hierarchy with about 1.8 edges per vertex and 15% reciprocal edges.
pub fn workload(n: usize) -> DirectedGraph {
    hierarchical_graph(n, n * 9 / 5, 0.15, 7).expect("n >= 2")
}

/// Default model with a short training schedule.
pub fn short_training(geometry: Geometry) -> DsaeConfig {
    DsaeConfig {
        geometry,
        epochs: 20,
        patience: 20,
        ..DsaeConfig::default()
    }
}
