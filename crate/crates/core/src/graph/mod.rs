//! Planning substrate: undirected graphs with deterministic and stochastic
//! edges, robot states, information vectors and world realizations.

mod closure;
mod cuts;
mod io;
mod world;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use closure::{
    metric_closure, optimistic_closure, reachable_set, reachable_targets, world_closure,
    MetricClosure,
};
pub use cuts::{critical_edge_sets, MAX_CUT_SIZE};
pub use io::{GraphFile, NodeRecord, DetEdgeRecord, StochEdgeRecord};
pub use world::{enumerate_worlds, World};

/// Dense node index in `[0, |V|)`.
pub type NodeId = usize;

/// Default cap on the number of stochastic edges.
pub const DEFAULT_K_MAX: usize = 9;
/// Hard limit imposed by the bitmask encodings.
pub const MAX_STOCH_EDGES: usize = 24;
pub const MAX_TARGETS: usize = 32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("node {0} is out of range")]
    NodeOutOfRange(usize),
    #[error("node ids must be dense: record {index} has id {id}")]
    NonDenseIds { index: usize, id: usize },
    #[error("node {0} has a non-finite position")]
    BadPosition(NodeId),
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("edge ({u}, {v}) has invalid cost {cost}")]
    BadCost { u: NodeId, v: NodeId, cost: f64 },
    #[error("edge ({u}, {v}) has blocking probability {p} outside [0, 1]")]
    BadProbability { u: NodeId, v: NodeId, p: f64 },
    #[error("start node {0} is also a target")]
    StartIsTarget(NodeId),
    #[error("{k} stochastic edges exceed the limit of {k_max}")]
    TooManyStochasticEdges { k: usize, k_max: usize },
    #[error("{0} targets exceed the supported maximum of 32")]
    TooManyTargets(usize),
    #[error("information vector has length {got}, graph has {expected} stochastic edges")]
    InfoLength { got: usize, expected: usize },
    #[error("malformed graph json: {0}")]
    Json(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeoTag {
    pub lat: f64,
    pub lon: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub x_m: f64,
    pub y_m: f64,
    pub geo: Option<GeoTag>,
}

impl Node {
    pub fn at(id: NodeId, x_m: f64, y_m: f64) -> Self {
        Node { id, x_m, y_m, geo: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetEdge {
    pub u: NodeId,
    pub v: NodeId,
    pub cost_m: f64,
    pub path: Option<Vec<[f64; 2]>>,
}

impl DetEdge {
    pub fn new(u: NodeId, v: NodeId, cost_m: f64) -> Self {
        DetEdge { u, v, cost_m, path: None }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StochKind {
    #[default]
    Pinch,
    Wind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StochEdge {
    pub u: NodeId,
    pub v: NodeId,
    pub cost_m: f64,
    pub block_prob: f64,
    pub kind: StochKind,
    pub path: Option<Vec<[f64; 2]>>,
}

impl StochEdge {
    pub fn new(u: NodeId, v: NodeId, cost_m: f64, block_prob: f64) -> Self {
        StochEdge { u, v, cost_m, block_prob, kind: StochKind::Pinch, path: None }
    }

    pub fn wind(mut self) -> Self {
        self.kind = StochKind::Wind;
        self
    }

    /// The endpoint that is not `from`.
    pub fn other(&self, from: NodeId) -> NodeId {
        if from == self.u {
            self.v
        } else {
            self.u
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeRef {
    Det(usize),
    Stoch(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeStatus {
    Ambiguous,
    Traversable,
    Untraversable,
}

impl EdgeStatus {
    pub fn symbol(self) -> char {
        match self {
            EdgeStatus::Ambiguous => 'A',
            EdgeStatus::Traversable => 'T',
            EdgeStatus::Untraversable => 'U',
        }
    }
}

/// Per-stochastic-edge knowledge, packed as two bitmasks.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct InfoVector {
    len: u8,
    known: u32,
    open: u32,
}

impl InfoVector {
    pub fn all_ambiguous(k: usize) -> Self {
        assert!(k <= MAX_STOCH_EDGES);
        InfoVector { len: k as u8, known: 0, open: 0 }
    }

    pub fn from_statuses(statuses: &[EdgeStatus]) -> Self {
        let mut info = InfoVector::all_ambiguous(statuses.len());
        for (i, s) in statuses.iter().enumerate() {
            match s {
                EdgeStatus::Ambiguous => {}
                EdgeStatus::Traversable => info = info.resolve(i, true),
                EdgeStatus::Untraversable => info = info.resolve(i, false),
            }
        }
        info
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> EdgeStatus {
        debug_assert!(i < self.len());
        if self.known & (1 << i) == 0 {
            EdgeStatus::Ambiguous
        } else if self.open & (1 << i) != 0 {
            EdgeStatus::Traversable
        } else {
            EdgeStatus::Untraversable
        }
    }

    pub fn is_ambiguous(&self, i: usize) -> bool {
        self.known & (1 << i) == 0
    }

    /// Resolve an ambiguous edge. Statuses never change once known.
    pub fn resolve(self, i: usize, traversable: bool) -> Self {
        assert!(i < self.len(), "edge index {i} out of range");
        assert!(self.is_ambiguous(i), "edge {i} is already disambiguated");
        InfoVector {
            len: self.len,
            known: self.known | (1 << i),
            open: if traversable { self.open | (1 << i) } else { self.open },
        }
    }

    pub fn ambiguous(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&i| self.is_ambiguous(i))
    }

    pub fn statuses(&self) -> Vec<EdgeStatus> {
        (0..self.len()).map(|i| self.get(i)).collect()
    }

    pub fn known_count(&self) -> u32 {
        self.known.count_ones()
    }

    /// Compact `ATU` string, one symbol per edge.
    pub fn to_symbols(&self) -> String {
        self.statuses().into_iter().map(EdgeStatus::symbol).collect()
    }

    pub fn from_symbols(s: &str) -> Option<Self> {
        let statuses: Option<Vec<_>> = s
            .chars()
            .map(|c| match c {
                'A' => Some(EdgeStatus::Ambiguous),
                'T' => Some(EdgeStatus::Traversable),
                'U' => Some(EdgeStatus::Untraversable),
                _ => None,
            })
            .collect();
        let statuses = statuses?;
        (statuses.len() <= MAX_STOCH_EDGES).then(|| InfoVector::from_statuses(&statuses))
    }
}

impl fmt::Debug for InfoVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "InfoVector({})", self.to_symbols())
    }
}

/// `(a, S, I)`: current node, visited targets as a bitmask over the graph's
/// sorted target list, and edge knowledge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RobotState {
    pub at: NodeId,
    pub visited: u32,
    pub info: InfoVector,
}

impl RobotState {
    pub fn initial(g: &StochasticGraph) -> Self {
        RobotState { at: g.start, visited: 0, info: InfoVector::all_ambiguous(g.k()) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StochasticGraph {
    nodes: Vec<Node>,
    det_edges: Vec<DetEdge>,
    stoch_edges: Vec<StochEdge>,
    start: NodeId,
    targets: Vec<NodeId>,
    adjacency: Vec<Vec<(NodeId, EdgeRef)>>,
    target_index: Vec<Option<usize>>,
}

impl StochasticGraph {
    /// Validates and normalizes a graph.
    ///
    /// Stochastic edges with blocking probability 0 become deterministic,
    /// probability 1 edges are dropped, duplicate edges within a category
    /// collapse to the cheaper one, and a stochastic edge parallel to a
    /// deterministic one survives only if it is strictly shorter.
    pub fn new(
        nodes: Vec<Node>,
        det_edges: Vec<DetEdge>,
        stoch_edges: Vec<StochEdge>,
        start: NodeId,
        targets: Vec<NodeId>,
        k_max: usize,
    ) -> Result<Self, GraphError> {
        let n = nodes.len();
        for (index, node) in nodes.iter().enumerate() {
            if node.id != index {
                return Err(GraphError::NonDenseIds { index, id: node.id });
            }
            if !node.x_m.is_finite() || !node.y_m.is_finite() {
                return Err(GraphError::BadPosition(index));
            }
        }
        let check_edge = |u: NodeId, v: NodeId, cost: f64| -> Result<(), GraphError> {
            if u >= n {
                return Err(GraphError::NodeOutOfRange(u));
            }
            if v >= n {
                return Err(GraphError::NodeOutOfRange(v));
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if !cost.is_finite() || cost < 0.0 {
                return Err(GraphError::BadCost { u, v, cost });
            }
            Ok(())
        };

        let mut det: Vec<DetEdge> = Vec::new();
        let mut det_slot: HashMap<(NodeId, NodeId), usize> = HashMap::new();
        let mut push_det = |e: DetEdge, det: &mut Vec<DetEdge>| {
            let key = (e.u.min(e.v), e.u.max(e.v));
            match det_slot.get(&key) {
                Some(&i) => {
                    if e.cost_m < det[i].cost_m {
                        det[i] = e;
                    }
                }
                None => {
                    det_slot.insert(key, det.len());
                    det.push(e);
                }
            }
        };
        for e in det_edges {
            check_edge(e.u, e.v, e.cost_m)?;
            push_det(e, &mut det);
        }

        let mut stoch: Vec<StochEdge> = Vec::new();
        let mut stoch_slot: HashMap<(NodeId, NodeId), usize> = HashMap::new();
        for e in stoch_edges {
            check_edge(e.u, e.v, e.cost_m)?;
            if !(0.0..=1.0).contains(&e.block_prob) {
                return Err(GraphError::BadProbability { u: e.u, v: e.v, p: e.block_prob });
            }
            if e.block_prob == 0.0 {
                push_det(DetEdge { u: e.u, v: e.v, cost_m: e.cost_m, path: e.path }, &mut det);
                continue;
            }
            if e.block_prob == 1.0 {
                continue;
            }
            let key = (e.u.min(e.v), e.u.max(e.v));
            match stoch_slot.get(&key) {
                Some(&i) => {
                    if e.cost_m < stoch[i].cost_m {
                        stoch[i] = e;
                    }
                }
                None => {
                    stoch_slot.insert(key, stoch.len());
                    stoch.push(e);
                }
            }
        }
        // Folding p = 0 edges may have added det edges after a stochastic one
        // was accepted, so the parallel check runs last.
        stoch.retain(|e| {
            let key = (e.u.min(e.v), e.u.max(e.v));
            det_slot.get(&key).is_none_or(|&i| e.cost_m < det[i].cost_m)
        });

        if start >= n {
            return Err(GraphError::NodeOutOfRange(start));
        }
        let mut targets = targets;
        targets.sort_unstable();
        targets.dedup();
        for &t in &targets {
            if t >= n {
                return Err(GraphError::NodeOutOfRange(t));
            }
            if t == start {
                return Err(GraphError::StartIsTarget(t));
            }
        }
        if targets.len() > MAX_TARGETS {
            return Err(GraphError::TooManyTargets(targets.len()));
        }
        let k_max = k_max.min(MAX_STOCH_EDGES);
        if stoch.len() > k_max {
            return Err(GraphError::TooManyStochasticEdges { k: stoch.len(), k_max });
        }

        let mut adjacency = vec![Vec::new(); n];
        for (i, e) in det.iter().enumerate() {
            adjacency[e.u].push((e.v, EdgeRef::Det(i)));
            adjacency[e.v].push((e.u, EdgeRef::Det(i)));
        }
        for (i, e) in stoch.iter().enumerate() {
            adjacency[e.u].push((e.v, EdgeRef::Stoch(i)));
            adjacency[e.v].push((e.u, EdgeRef::Stoch(i)));
        }
        let mut target_index = vec![None; n];
        for (i, &t) in targets.iter().enumerate() {
            target_index[t] = Some(i);
        }

        Ok(StochasticGraph {
            nodes,
            det_edges: det,
            stoch_edges: stoch,
            start,
            targets,
            adjacency,
            target_index,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn det_edges(&self) -> &[DetEdge] {
        &self.det_edges
    }

    pub fn stoch_edges(&self) -> &[StochEdge] {
        &self.stoch_edges
    }

    pub fn stoch_edge(&self, i: usize) -> &StochEdge {
        &self.stoch_edges[i]
    }

    /// Number of stochastic edges.
    pub fn k(&self) -> usize {
        self.stoch_edges.len()
    }

    pub fn start(&self) -> NodeId {
        self.start
    }

    /// Targets in ascending node order; bit `i` of a visited mask refers to
    /// `targets()[i]`.
    pub fn targets(&self) -> &[NodeId] {
        &self.targets
    }

    pub fn target_index(&self, node: NodeId) -> Option<usize> {
        self.target_index.get(node).copied().flatten()
    }

    pub fn target_bit(&self, node: NodeId) -> u32 {
        self.target_index(node).map_or(0, |i| 1 << i)
    }

    pub fn all_targets_mask(&self) -> u32 {
        if self.targets.len() == 32 {
            u32::MAX
        } else {
            (1u32 << self.targets.len()) - 1
        }
    }

    pub fn targets_in(&self, mask: u32) -> Vec<NodeId> {
        self.targets
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, &t)| t)
            .collect()
    }

    pub fn adjacency(&self, node: NodeId) -> &[(NodeId, EdgeRef)] {
        &self.adjacency[node]
    }

    pub fn edge_cost(&self, e: EdgeRef) -> f64 {
        match e {
            EdgeRef::Det(i) => self.det_edges[i].cost_m,
            EdgeRef::Stoch(i) => self.stoch_edges[i].cost_m,
        }
    }

    pub fn windy_count(&self) -> usize {
        self.stoch_edges.iter().filter(|e| e.kind == StochKind::Wind).count()
    }

    pub fn check_info(&self, info: &InfoVector) -> Result<(), GraphError> {
        if info.len() != self.k() {
            return Err(GraphError::InfoLength { got: info.len(), expected: self.k() });
        }
        Ok(())
    }
}
