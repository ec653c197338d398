//! Online comparison actors.
//!
//! Every actor plans on the optimistic metric, walks its planned shortest
//! path, and looks at the first ambiguous edge on it once it stands at the
//! near endpoint. A traversable edge is crossed; a blocked one leaves the
//! robot where it is. Targets lying on a walked path count as visited.

mod walker;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{NodeId, StochasticGraph, World};
use crate::solver::CostModel;
use crate::tsp::{christofides_tour, held_karp_path, TspError};
use walker::{Advance, Walker};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineKind {
    Greedy,
    Tsp,
    Cr,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 3] = [BaselineKind::Greedy, BaselineKind::Tsp, BaselineKind::Cr];

    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::Greedy => "greedy",
            BaselineKind::Tsp => "tsp",
            BaselineKind::Cr => "cr",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StepAction {
    Travel { nodes: Vec<NodeId> },
    Disambiguate { edge: usize, traversable: bool },
    GiveUp { target: NodeId },
    Finish,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActorStep {
    #[serde(flatten)]
    pub action: StepAction,
    pub cost_m: f64,
    pub cumulative_m: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub actor: BaselineKind,
    pub steps: Vec<ActorStep>,
    pub total_cost_m: f64,
    /// Targets in the order they were first reached.
    pub visited: Vec<NodeId>,
    pub end: NodeId,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ActorError {
    #[error(transparent)]
    Tsp(#[from] TspError),
    #[error("world has {got} edges, graph has {want}")]
    WorldLength { got: usize, want: usize },
}

pub fn run_baseline(
    kind: BaselineKind,
    g: &StochasticGraph,
    world: &World,
    cost: &CostModel,
) -> Result<Trajectory, ActorError> {
    match kind {
        BaselineKind::Greedy => greedy_actor(g, world, cost),
        BaselineKind::Tsp => optimistic_tsp_actor(g, world, cost),
        BaselineKind::Cr => cyclic_routing_actor(g, world, cost),
    }
}

fn check_world(g: &StochasticGraph, world: &World) -> Result<(), ActorError> {
    if world.len() != g.k() {
        return Err(ActorError::WorldLength { got: world.len(), want: g.k() });
    }
    Ok(())
}

/// Always heads for the nearest unvisited target on the optimistic metric,
/// lowest node id on ties.
pub fn greedy_actor(g: &StochasticGraph, world: &World, cost: &CostModel) -> Result<Trajectory, ActorError> {
    check_world(g, world)?;
    let mut w = Walker::new(g, world, *cost);
    loop {
        let rem = w.remaining();
        if rem == 0 {
            break;
        }
        let opt = w.optimistic();
        let mut best: Option<(f64, NodeId)> = None;
        for t in g.targets_in(rem) {
            let d = opt.dist(w.at(), t);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, t));
            }
        }
        let (_, t) = best.expect("remaining targets are reachable");
        w.advance_toward(t);
    }
    Ok(w.finish(BaselineKind::Greedy))
}

/// Follows the optimal optimistic path through every remaining target and
/// home, recomputed after each disambiguation.
pub fn optimistic_tsp_actor(g: &StochasticGraph, world: &World, cost: &CostModel) -> Result<Trajectory, ActorError> {
    check_world(g, world)?;
    let mut w = Walker::new(g, world, *cost);
    'plan: loop {
        let rem = w.remaining();
        if rem == 0 {
            break;
        }
        let opt = w.optimistic();
        let route = held_karp_path(&opt.view(), w.at(), g.start(), &g.targets_in(rem))?;
        for &t in &route.order[1..] {
            if t == g.start() && w.at() != g.start() {
                break;
            }
            if !w.is_pending(t) {
                continue;
            }
            if w.advance_toward(t) != Advance::Arrived {
                continue 'plan;
            }
        }
    }
    Ok(w.finish(BaselineKind::Tsp))
}

/// Christofides cycle over the start and targets, fixed up front. A target
/// whose leg is cut by a new blocked edge is deferred to the next lap;
/// targets proven unreachable are skipped.
pub fn cyclic_routing_actor(g: &StochasticGraph, world: &World, cost: &CostModel) -> Result<Trajectory, ActorError> {
    check_world(g, world)?;
    let mut w = Walker::new(g, world, *cost);
    let opt = w.optimistic();
    let reachable = g.targets_in(w.remaining());
    let tour = christofides_tour(&opt.view(), &reachable, g.start())?;
    let mut cycle: Vec<NodeId> = tour.order[1..].to_vec();
    if let (Some(&first), Some(&last)) = (cycle.first(), cycle.last()) {
        if opt.dist(g.start(), last) < opt.dist(g.start(), first) {
            cycle.reverse();
        }
    }
    while w.remaining() != 0 {
        for &t in &cycle {
            while w.is_pending(t) {
                match w.advance_toward(t) {
                    Advance::Arrived | Advance::Crossed => {}
                    Advance::Blocked => break,
                }
            }
        }
    }
    Ok(w.finish(BaselineKind::Cr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{DetEdge, Node, StochEdge};

    /// Start 0, target 3. Short route 0-1-3 with a stochastic hop 1-3;
    /// long detour 0-2-3.
    fn detour_graph() -> StochasticGraph {
        let nodes = (0..4).map(|i| Node::at(i, i as f64, 0.0)).collect();
        StochasticGraph::new(
            nodes,
            vec![DetEdge::new(0, 1, 1.0), DetEdge::new(0, 2, 5.0), DetEdge::new(2, 3, 5.0)],
            vec![StochEdge::new(1, 3, 1.0, 0.5)],
            0,
            vec![3],
            9,
        )
        .unwrap()
    }

    #[test]
    fn blocked_shortcut_forces_a_detour() {
        let g = detour_graph();
        let cm = CostModel::default();
        for kind in BaselineKind::ALL {
            let open = run_baseline(kind, &g, &World::from_bits(1, 0), &cm).unwrap();
            assert_eq!(open.total_cost_m, 4.0, "{kind:?}");
            // Approach 1, look, go back 1, detour 10, return 10.
            let shut = run_baseline(kind, &g, &World::from_bits(1, 1), &cm).unwrap();
            assert_eq!(shut.total_cost_m, 22.0, "{kind:?}");
            assert_eq!(shut.end, 0);
            assert_eq!(shut.visited, vec![3]);
        }
    }

    #[test]
    fn unreachable_target_is_given_up() {
        let nodes = (0..3).map(|i| Node::at(i, i as f64, 0.0)).collect();
        let g = StochasticGraph::new(
            nodes,
            vec![DetEdge::new(0, 1, 2.0)],
            vec![StochEdge::new(1, 2, 1.0, 0.3)],
            0,
            vec![1, 2],
            9,
        )
        .unwrap();
        let cm = CostModel::default();
        for kind in BaselineKind::ALL {
            let t = run_baseline(kind, &g, &World::from_bits(1, 1), &cm).unwrap();
            assert_eq!(t.total_cost_m, 4.0);
            assert!(t.steps.iter().any(|s| s.action == StepAction::GiveUp { target: 2 }));
            assert_eq!(t.steps.last().unwrap().action, StepAction::Finish);
        }
    }

    #[test]
    fn deterministic_graph_greedy_is_nearest_neighbour() {
        // Line: 0 at x=0, targets at x=1, x=-3, x=4.
        let xs = [0.0, 1.0, -3.0, 4.0];
        let nodes = xs.iter().enumerate().map(|(i, &x)| Node::at(i, x, 0.0)).collect();
        let g = StochasticGraph::new(
            nodes,
            vec![DetEdge::new(0, 1, 1.0), DetEdge::new(0, 2, 3.0), DetEdge::new(1, 3, 3.0)],
            vec![],
            0,
            vec![1, 2, 3],
            9,
        )
        .unwrap();
        let cm = CostModel::default();
        let t = greedy_actor(&g, &World::from_bits(0, 0), &cm).unwrap();
        assert_eq!(t.visited, vec![1, 3, 2]);
        assert_eq!(t.total_cost_m, 14.0);
        let tsp = optimistic_tsp_actor(&g, &World::from_bits(0, 0), &cm).unwrap();
        assert_eq!(tsp.total_cost_m, 14.0);
    }

    #[test]
    fn trajectory_json_is_flat() {
        let g = detour_graph();
        let t = greedy_actor(&g, &World::from_bits(1, 0), &CostModel::default()).unwrap();
        let v = serde_json::to_value(&t).unwrap();
        assert_eq!(v["steps"][0]["type"], "travel");
        assert_eq!(v["steps"][1]["type"], "disambiguate");
    }
}
