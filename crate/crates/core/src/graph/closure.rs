use super::{EdgeRef, EdgeStatus, InfoVector, NodeId, StochasticGraph, World};
use crate::tsp::MetricView;

/// All-pairs shortest paths with first-hop reconstruction.
///
/// Built with Floyd-Warshall from a symmetric start, so `dist(u, v)` and
/// `dist(v, u)` are bit-identical.
#[derive(Clone, Debug)]
pub struct MetricClosure {
    n: usize,
    dist: Vec<f64>,
    next: Vec<u32>,
    hop: Vec<Option<EdgeRef>>,
}

const NO_HOP: u32 = u32::MAX;

impl MetricClosure {
    pub(crate) fn build(g: &StochasticGraph, usable: impl Fn(EdgeRef) -> bool) -> Self {
        let n = g.node_count();
        let mut dist = vec![f64::INFINITY; n * n];
        let mut next = vec![NO_HOP; n * n];
        let mut hop = vec![None; n * n];
        for u in 0..n {
            dist[u * n + u] = 0.0;
            next[u * n + u] = u as u32;
            // Deterministic edges come first in the adjacency list, so a
            // stochastic edge only wins a hop when strictly cheaper.
            for &(v, e) in g.adjacency(u) {
                if !usable(e) {
                    continue;
                }
                let c = g.edge_cost(e);
                if c < dist[u * n + v] {
                    dist[u * n + v] = c;
                    next[u * n + v] = v as u32;
                    hop[u * n + v] = Some(e);
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                let dik = dist[i * n + k];
                if dik == f64::INFINITY {
                    continue;
                }
                for j in 0..n {
                    let cand = dik + dist[k * n + j];
                    if cand < dist[i * n + j] {
                        dist[i * n + j] = cand;
                        next[i * n + j] = next[i * n + k];
                    }
                }
            }
        }
        MetricClosure { n, dist, next, hop }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dist(&self, u: NodeId, v: NodeId) -> f64 {
        self.dist[u * self.n + v]
    }

    pub fn matrix(&self) -> &[f64] {
        &self.dist
    }

    pub fn view(&self) -> MetricView<'_> {
        MetricView::new(&self.dist, self.n)
    }

    /// Node sequence of a shortest path, `None` when disconnected.
    pub fn path(&self, u: NodeId, v: NodeId) -> Option<Vec<NodeId>> {
        if self.next[u * self.n + v] == NO_HOP {
            return None;
        }
        let mut path = vec![u];
        let mut cur = u;
        while cur != v {
            cur = self.next[cur * self.n + v] as usize;
            path.push(cur);
        }
        Some(path)
    }

    /// The direct edge used when a shortest path steps from `u` to `v`.
    pub fn hop(&self, u: NodeId, v: NodeId) -> Option<EdgeRef> {
        self.hop[u * self.n + v]
    }

    /// Edges along the shortest path from `u` to `v`.
    pub fn path_edges(&self, u: NodeId, v: NodeId) -> Option<Vec<(NodeId, NodeId, EdgeRef)>> {
        let nodes = self.path(u, v)?;
        Some(
            nodes
                .windows(2)
                .map(|w| (w[0], w[1], self.hop(w[0], w[1]).expect("hop on a shortest path")))
                .collect(),
        )
    }
}

/// Distances over deterministic edges plus stochastic edges known to be
/// traversable. Ambiguous and untraversable edges are excluded.
pub fn metric_closure(g: &StochasticGraph, info: &InfoVector) -> MetricClosure {
    MetricClosure::build(g, |e| match e {
        EdgeRef::Det(_) => true,
        EdgeRef::Stoch(i) => info.get(i) == EdgeStatus::Traversable,
    })
}

/// Distances assuming every ambiguous edge is traversable.
pub fn optimistic_closure(g: &StochasticGraph, info: &InfoVector) -> MetricClosure {
    MetricClosure::build(g, |e| match e {
        EdgeRef::Det(_) => true,
        EdgeRef::Stoch(i) => info.get(i) != EdgeStatus::Untraversable,
    })
}

/// Distances in a fully realized world.
pub fn world_closure(g: &StochasticGraph, world: &World) -> MetricClosure {
    MetricClosure::build(g, |e| match e {
        EdgeRef::Det(_) => true,
        EdgeRef::Stoch(i) => world.is_traversable(i),
    })
}

pub(crate) fn component(
    g: &StochasticGraph,
    from: NodeId,
    usable: impl Fn(EdgeRef) -> bool,
) -> Vec<bool> {
    let mut seen = vec![false; g.node_count()];
    let mut stack = vec![from];
    seen[from] = true;
    while let Some(u) = stack.pop() {
        for &(v, e) in g.adjacency(u) {
            if !seen[v] && usable(e) {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen
}

/// Targets reachable from the start when ambiguous edges are assumed open,
/// as a bitmask over `g.targets()`.
pub fn reachable_targets(g: &StochasticGraph, info: &InfoVector) -> u32 {
    let seen = component(g, g.start(), |e| match e {
        EdgeRef::Det(_) => true,
        EdgeRef::Stoch(i) => info.get(i) != EdgeStatus::Untraversable,
    });
    g.targets()
        .iter()
        .enumerate()
        .filter(|(_, &t)| seen[t])
        .fold(0, |m, (i, _)| m | (1 << i))
}

/// Optimistic reachability: a target drops out only when every path to it
/// crosses an untraversable edge.
pub fn reachable_set(g: &StochasticGraph, info: &InfoVector) -> Vec<NodeId> {
    g.targets_in(reachable_targets(g, info))
}
