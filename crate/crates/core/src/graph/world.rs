use super::{EdgeStatus, GraphError, StochasticGraph};

/// One joint realization of every stochastic edge. Bit `i` of `blocked`
/// set means edge `i` is untraversable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct World {
    len: u8,
    blocked: u32,
}

impl World {
    pub fn from_bits(k: usize, blocked: u32) -> Self {
        assert!(k <= 32 && (k == 32 || blocked >> k == 0), "world bits out of range");
        World { len: k as u8, blocked }
    }

    pub fn all_open(k: usize) -> Self {
        World::from_bits(k, 0)
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bits(&self) -> u32 {
        self.blocked
    }

    pub fn is_traversable(&self, i: usize) -> bool {
        self.blocked & (1 << i) == 0
    }

    pub fn realization(&self) -> Vec<EdgeStatus> {
        (0..self.len())
            .map(|i| {
                if self.is_traversable(i) {
                    EdgeStatus::Traversable
                } else {
                    EdgeStatus::Untraversable
                }
            })
            .collect()
    }

    /// Product of independent Bernoulli outcomes, multiplied in edge order.
    pub fn probability(&self, g: &StochasticGraph) -> f64 {
        g.stoch_edges().iter().enumerate().fold(1.0, |p, (i, e)| {
            p * if self.is_traversable(i) { 1.0 - e.block_prob } else { e.block_prob }
        })
    }
}

/// All `2^k` worlds in ascending bit order with their probabilities.
pub fn enumerate_worlds(g: &StochasticGraph, k_max: usize) -> Result<Vec<(World, f64)>, GraphError> {
    let k = g.k();
    if k > k_max || k > 24 {
        return Err(GraphError::TooManyStochasticEdges { k, k_max: k_max.min(24) });
    }
    Ok((0..1u32 << k)
        .map(|bits| {
            let w = World::from_bits(k, bits);
            (w, w.probability(g))
        })
        .collect())
}
