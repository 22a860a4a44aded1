use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::DirectedGraph;
use crate::error::{Error, Result};

/// Random connected hierarchy: a random recursive tree with edges pointing
/// from lower to higher vertex ids, extra forward edges up to `n_edges`, and
/// `reciprocity` of all edges made bidirectional.
pub fn hierarchical_graph(n: usize, n_edges: usize, reciprocity: f64, seed: u64) -> Result<DirectedGraph> {
    if n < 2 {
        return Err(Error::InvalidArgument("need at least 2 vertices".into()));
    }
    if !(0.0..=1.0).contains(&reciprocity) {
        return Err(Error::InvalidArgument(format!("reciprocity {reciprocity} outside [0, 1]")));
    }
    let pairs = ((reciprocity * n_edges as f64) / 2.0).round() as usize;
    let forward = n_edges.saturating_sub(pairs);
    let max_forward = n * (n - 1) / 2;
    if forward < n - 1 || forward > max_forward || pairs > forward {
        return Err(Error::InvalidArgument(format!(
            "cannot place {n_edges} edges with reciprocity {reciprocity} on {n} vertices"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for v in 1..n {
        edges.insert((rng.gen_range(0..v), v));
    }
    while edges.len() < forward {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            edges.insert((a.min(b), a.max(b)));
        }
    }
    let mut list: Vec<(usize, usize)> = edges.into_iter().collect();
    let mut reversed: Vec<(usize, usize)> = list.choose_multiple(&mut rng, pairs).map(|&(u, v)| (v, u)).collect();
    list.append(&mut reversed);
    Ok(DirectedGraph::from_pairs(n, &list))
}
