//! Per-information-vector analysis and the relaxed set-TSP heuristic.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::graph::{
    metric_closure, optimistic_closure, reachable_targets, EdgeRef, EdgeStatus, InfoVector,
    MetricClosure, NodeId, RobotState, StochasticGraph,
};
use crate::tsp::set_tsp_path_cost;

/// Everything about a graph that depends only on the information vector.
#[derive(Debug)]
pub struct InfoData {
    /// Deterministic plus known-traversable edges.
    pub known: MetricClosure,
    /// Ambiguous edges assumed traversable.
    pub optimistic: MetricClosure,
    /// Optimistically reachable targets (bitmask over targets).
    pub reach: u32,
    /// Targets in the start's known-traversable component.
    pub known_targets: u32,
    /// Membership in the start's known-traversable component.
    pub in_known: Vec<bool>,
    /// For each target outside the known component but still optimistically
    /// reachable: known-side endpoints of the ambiguous edges separating the
    /// known component from the target's region. Blocking all of them cuts
    /// the target off, and any policy either crosses one of them to reach the
    /// target or observes one of them from the known side to give up on it.
    pub frontier: Vec<Option<Vec<NodeId>>>,
}

impl InfoData {
    pub fn new(g: &StochasticGraph, info: &InfoVector) -> Self {
        let known = metric_closure(g, info);
        let optimistic = optimistic_closure(g, info);
        let reach = reachable_targets(g, info);
        let n = g.node_count();
        let s = g.start();
        let in_known: Vec<bool> = (0..n).map(|v| known.dist(s, v).is_finite()).collect();
        let known_targets = g
            .targets()
            .iter()
            .enumerate()
            .filter(|(_, &t)| in_known[t])
            .fold(0u32, |m, (i, _)| m | (1 << i));

        // Regions of the optimistic graph once the known component is removed.
        let mut region = vec![usize::MAX; n];
        let mut next_region = 0;
        for v in 0..n {
            if in_known[v] || region[v] != usize::MAX {
                continue;
            }
            let mut stack = vec![v];
            region[v] = next_region;
            while let Some(u) = stack.pop() {
                for &(w, e) in g.adjacency(u) {
                    let open = match e {
                        EdgeRef::Det(_) => true,
                        EdgeRef::Stoch(i) => info.get(i) != EdgeStatus::Untraversable,
                    };
                    if open && !in_known[w] && region[w] == usize::MAX {
                        region[w] = next_region;
                        stack.push(w);
                    }
                }
            }
            next_region += 1;
        }
        let mut region_frontier: Vec<Vec<NodeId>> = vec![Vec::new(); next_region];
        for i in info.ambiguous() {
            let e = g.stoch_edge(i);
            for (inside, outside) in [(e.u, e.v), (e.v, e.u)] {
                if in_known[inside] && !in_known[outside] {
                    region_frontier[region[outside]].push(inside);
                }
            }
        }
        for f in &mut region_frontier {
            f.sort_unstable();
            f.dedup();
        }
        let frontier = g
            .targets()
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                (reach & (1 << i) != 0 && !in_known[t]).then(|| region_frontier[region[t]].clone())
            })
            .collect();

        InfoData { known, optimistic, reach, known_targets, in_known, frontier }
    }
}

/// Shared caches for one solve. Safe to read from several workers.
#[derive(Debug)]
pub struct Planner<'g> {
    pub g: &'g StochasticGraph,
    infos: RwLock<HashMap<InfoVector, Arc<InfoData>>>,
    h_cache: RwLock<HashMap<RobotState, f64>>,
}

impl<'g> Planner<'g> {
    pub fn new(g: &'g StochasticGraph) -> Self {
        Planner { g, infos: RwLock::new(HashMap::new()), h_cache: RwLock::new(HashMap::new()) }
    }

    pub fn info(&self, info: &InfoVector) -> Arc<InfoData> {
        if let Some(d) = self.infos.read().expect("info cache").get(info) {
            return d.clone();
        }
        let data = Arc::new(InfoData::new(self.g, info));
        self.infos.write().expect("info cache").entry(*info).or_insert(data).clone()
    }

    pub fn cached_h(&self, state: &RobotState) -> Option<f64> {
        self.h_cache.read().expect("h cache").get(state).copied()
    }

    pub fn store_h(&self, state: RobotState, h: f64) {
        self.h_cache.write().expect("h cache").insert(state, h);
    }

    pub fn heuristic(&self, state: &RobotState) -> f64 {
        if let Some(h) = self.cached_h(state) {
            return h;
        }
        let h = heuristic_with(self.g, &self.info(&state.info), state);
        self.store_h(*state, h);
        h
    }
}

/// Admissible lower bound on the cost-to-go of an OR state.
///
/// Relaxed problem on the optimistic metric: visit every unvisited target in
/// the known component, and for every target that might be cut off, reach at
/// least one known-side endpoint of its frontier edges; then return home.
pub fn heuristic(g: &StochasticGraph, state: &RobotState) -> f64 {
    heuristic_with(g, &InfoData::new(g, &state.info), state)
}

pub(crate) fn heuristic_with(g: &StochasticGraph, data: &InfoData, state: &RobotState) -> f64 {
    let s = g.start();
    let pending = data.reach & !state.visited;
    let mut must = Vec::new();
    let mut groups: Vec<Vec<NodeId>> = Vec::new();
    for (i, &t) in g.targets().iter().enumerate() {
        if pending & (1 << i) == 0 {
            continue;
        }
        if data.known_targets & (1 << i) != 0 {
            must.push(t);
        } else if let Some(group) = &data.frontier[i] {
            if !groups.contains(group) {
                groups.push(group.clone());
            }
        }
    }
    let view = data.optimistic.view();
    match set_tsp_path_cost(&view, state.at, s, &must, &groups) {
        Ok(h) => h,
        // Too many items for the exact DP: fall back to the return leg alone.
        Err(_) => view.get(state.at, s),
    }
}
