//! Seeded random instances for desk-scale benchmarking.
//!
//! Points are drawn in a square and joined by their Gabriel graph (always
//! connected, planar, short local edges). A few edges are then promoted to
//! stochastic pinch or windy edges.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{DetEdge, GraphError, Node, StochEdge, StochasticGraph};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    /// Inclusive node-count range.
    pub nodes: (usize, usize),
    /// Inclusive target-count range, clipped to `nodes - 1`.
    pub targets: (usize, usize),
    pub pinch_edges: (usize, usize),
    pub windy_edges: (usize, usize),
    pub block_prob: (f64, f64),
    pub p_wind: f64,
    pub extent_m: f64,
    pub k_max: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            nodes: (4, 10),
            targets: (1, 5),
            pinch_edges: (1, 4),
            windy_edges: (0, 2),
            block_prob: (0.1, 0.9),
            p_wind: 0.05,
            extent_m: 1000.0,
            k_max: 9,
        }
    }
}

/// Per-instance seed derived from a run seed, so instance `i` does not depend
/// on how many instances are generated.
pub fn instance_seed(seed: u64, index: u64) -> u64 {
    seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

pub fn random_instance(config: &GeneratorConfig, seed: u64) -> Result<StochasticGraph, GraphError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(config.nodes.0.max(2)..=config.nodes.1.max(config.nodes.0.max(2)));
    let pts: Vec<(f64, f64)> =
        (0..n).map(|_| (rng.random_range(0.0..config.extent_m), rng.random_range(0.0..config.extent_m))).collect();
    let mut edges = gabriel_edges(&pts);
    edges.shuffle(&mut rng);

    let pinch = rng.random_range(config.pinch_edges.0..=config.pinch_edges.1);
    let windy = rng.random_range(config.windy_edges.0..=config.windy_edges.1);
    let pinch = pinch.min(edges.len());
    let windy = windy.min(edges.len() - pinch);

    let dist = |a: usize, b: usize| ((pts[a].0 - pts[b].0).powi(2) + (pts[a].1 - pts[b].1).powi(2)).sqrt();
    let mut det = Vec::new();
    let mut stoch = Vec::new();
    for (i, &(a, b)) in edges.iter().enumerate() {
        if i < pinch {
            let (lo, hi) = config.block_prob;
            let p = if hi > lo { rng.random_range(lo..hi) } else { lo };
            stoch.push(StochEdge::new(a, b, dist(a, b), p));
        } else if i < pinch + windy {
            stoch.push(StochEdge::new(a, b, dist(a, b), config.p_wind).wind());
        } else {
            det.push(DetEdge::new(a, b, dist(a, b)));
        }
    }

    let max_t = config.targets.1.min(n - 1);
    let min_t = config.targets.0.clamp(1, max_t.max(1));
    let t = rng.random_range(min_t..=max_t.max(min_t));
    let mut candidates: Vec<usize> = (1..n).collect();
    candidates.shuffle(&mut rng);
    let targets = candidates[..t].to_vec();

    let nodes = pts.iter().enumerate().map(|(i, &(x, y))| Node::at(i, x, y)).collect();
    StochasticGraph::new(nodes, det, stoch, 0, targets, config.k_max)
}

/// Edges `(a, b)` with `a < b` whose diametral circle holds no other point.
fn gabriel_edges(pts: &[(f64, f64)]) -> Vec<(usize, usize)> {
    let n = pts.len();
    let mut out = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            let mx = (pts[a].0 + pts[b].0) / 2.0;
            let my = (pts[a].1 + pts[b].1) / 2.0;
            let r2 = ((pts[a].0 - pts[b].0).powi(2) + (pts[a].1 - pts[b].1).powi(2)) / 4.0;
            let empty = (0..n).all(|c| c == a || c == b || (pts[c].0 - mx).powi(2) + (pts[c].1 - my).powi(2) >= r2);
            if empty {
                out.push((a, b));
            }
        }
    }
    out
}
