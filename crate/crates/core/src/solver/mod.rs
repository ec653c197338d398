//! Optimal adaptive policies by AO* search over an AND-OR tree.
//!
//! OR nodes are decision points `(a, S, I)`. An action either finishes the
//! mission (visit every remaining target and go home) or walks through some
//! targets to an endpoint of an ambiguous edge and looks at it, which yields
//! an AND node with one child per outcome.

mod heuristic;
mod policy;
mod search;

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Execution;
use crate::graph::{GraphError, NodeId, StochasticGraph};

pub use heuristic::{heuristic, InfoData};
pub use policy::{ActionRecord, Outcomes, Policy, PolicyNode, StateRecord};
pub use search::{AoTree, NodeKind, NodeSummary};

/// Cost charged when a disambiguation reveals a blocked edge.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    /// Fraction of the edge length charged on the blocked outcome. Zero means
    /// only the approach to the near endpoint is paid.
    pub failed_probe_fraction: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel { failed_probe_fraction: 0.0 }
    }
}

impl CostModel {
    pub fn probe_cost(&self, edge_len: f64, traversable: bool) -> f64 {
        if traversable {
            edge_len
        } else {
            self.failed_probe_fraction * edge_len
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_expansions: usize,
    pub time_limit: Option<Duration>,
    /// Controls whether sibling heuristics are evaluated on the rayon pool.
    pub exec: Execution,
    pub cost: CostModel,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_expansions: 2_000_000,
            time_limit: None,
            exec: Execution::default(),
            cost: CostModel::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub expansions: usize,
    pub tree_nodes: usize,
    pub wall_time_s: f64,
    pub optimal: bool,
    pub root_f_m: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("targets {0:?} cannot be reached from the start even with every stochastic edge open")]
    Infeasible(Vec<NodeId>),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("{0} unvisited targets exceed the subset enumeration cap")]
    TooManyTargets(usize),
    #[error("internal: OR node {0} has no feasible action")]
    DeadEnd(usize),
}

/// Run AO* to completion (or until the budget runs out) and extract the
/// policy. A budget stop yields the best partial policy with
/// `optimal == false` and `open` leaves where the search was cut.
pub fn solve(g: &StochasticGraph, config: &SolverConfig) -> Result<(Policy, SolveStats), SolveError> {
    let tree = AoTree::search(g, config)?;
    let policy = tree.policy();
    Ok((policy, tree.stats().clone()))
}

/// Expected cost over all worlds, obtained by simulating the policy.
pub fn expected_cost(policy: &Policy, g: &StochasticGraph, cost: &CostModel) -> Result<f64, crate::evaluator::EvalError> {
    let worlds = crate::graph::enumerate_worlds(g, crate::graph::MAX_STOCH_EDGES)?;
    let mut total = 0.0;
    for (w, p) in &worlds {
        total += p * crate::evaluator::simulate_policy(policy, g, w, cost)?.cost_m;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{DetEdge, InfoVector, Node, RobotState, StochEdge};
    use crate::tsp::held_karp_tour;

    fn nodes(n: usize) -> Vec<Node> {
        (0..n).map(|i| Node::at(i, i as f64, 0.0)).collect()
    }

    /// Target 1 sits 2 m away over a coin-flip channel or 11 m around by land.
    fn detour(p: f64) -> StochasticGraph {
        StochasticGraph::new(
            nodes(3),
            vec![DetEdge::new(0, 2, 1.0), DetEdge::new(2, 1, 10.0)],
            vec![StochEdge::new(0, 1, 2.0, p)],
            0,
            vec![1],
            9,
        )
        .unwrap()
    }

    /// Two targets; target 1 hangs off node 3 behind two stochastic edges.
    fn two_critical_edges() -> StochasticGraph {
        StochasticGraph::new(
            nodes(4),
            vec![DetEdge::new(0, 2, 3.0), DetEdge::new(3, 1, 2.0)],
            vec![StochEdge::new(2, 3, 1.0, 0.5), StochEdge::new(0, 1, 10.0, 0.5)],
            0,
            vec![1, 2],
            9,
        )
        .unwrap()
    }

    fn sequential() -> SolverConfig {
        SolverConfig { exec: Execution::Sequential, ..SolverConfig::default() }
    }

    #[test]
    fn deterministic_graph_gives_the_tour() {
        let g = StochasticGraph::new(
            nodes(4),
            vec![DetEdge::new(0, 1, 1.0), DetEdge::new(1, 2, 2.0), DetEdge::new(2, 3, 3.0), DetEdge::new(3, 0, 4.0)],
            vec![],
            0,
            vec![1, 2, 3],
            9,
        )
        .unwrap();
        let (policy, stats) = solve(&g, &sequential()).unwrap();
        let closure = crate::graph::metric_closure(&g, &InfoVector::all_ambiguous(0));
        let tour = held_karp_tour(&closure.view(), 0, &[1, 2, 3]).unwrap();
        assert_eq!(policy.expected_cost_m, tour.cost);
        assert_eq!(tour.cost, 10.0);
        assert!(stats.optimal);
        assert_eq!(stats.expansions, 1);
        assert_eq!(heuristic(&g, &RobotState::initial(&g)), 10.0);
        assert!(matches!(policy.root, PolicyNode::Or { .. }));
    }

    #[test]
    fn coin_flip_channel_averages_the_branches() {
        let g = detour(0.5);
        let (policy, stats) = solve(&g, &sequential()).unwrap();
        assert!(stats.optimal);
        assert!((policy.expected_cost_m - 13.0).abs() < 1e-12);
        assert!((expected_cost(&policy, &g, &CostModel::default()).unwrap() - 13.0).abs() < 1e-12);
    }

    #[test]
    fn and_children_carry_complementary_probabilities() {
        let g = detour(0.3);
        let (policy, _) = solve(&g, &sequential()).unwrap();
        let PolicyNode::Or { next, .. } = &policy.root else { panic!("root is an OR node") };
        let PolicyNode::And { block_prob, outcomes, .. } = next.as_ref() else { panic!("probe first") };
        assert_eq!(*block_prob, 0.3);
        let f = |n: &PolicyNode| n.f_m();
        // Open: 2 m across, 2 m back. Blocked: 22 m around by land.
        assert!((f(&outcomes.traversable) - 2.0).abs() < 1e-12);
        assert!((f(&outcomes.untraversable) - 22.0).abs() < 1e-12);
        assert!((policy.expected_cost_m - (0.7 * 4.0 + 0.3 * 22.0)).abs() < 1e-12);
    }

    #[test]
    fn near_certain_channel_matches_the_open_tour() {
        let g = detour(1e-12);
        let (policy, _) = solve(&g, &sequential()).unwrap();
        assert!((policy.expected_cost_m - 4.0).abs() < 1e-9);
    }

    #[test]
    fn heuristic_on_two_critical_edges() {
        let g = two_critical_edges();
        let root = RobotState::initial(&g);
        // Visit node 2, stand at the channel (2, 3), come home.
        assert_eq!(heuristic(&g, &root), 6.0);
        let across = RobotState {
            at: 3,
            visited: g.target_bit(2),
            info: root.info.resolve(0, true),
        };
        // Node 1, then home the short way round through 2.
        assert_eq!(heuristic(&g, &across), 8.0);
        let done = RobotState { at: 0, visited: g.all_targets_mask(), info: root.info };
        assert_eq!(heuristic(&g, &done), 0.0);
    }

    #[test]
    fn no_terminal_action_while_a_target_is_only_stochastically_reachable() {
        let g = two_critical_edges();
        let mut tree = AoTree::new(&g, &sequential()).unwrap();
        tree.step().unwrap();
        // A terminal action would be the first child pushed.
        assert_eq!(tree.node(1).kind, NodeKind::And);
        let probes: std::collections::BTreeSet<(usize, u32)> = tree
            .nodes()
            .filter(|n| n.kind == NodeKind::And)
            .map(|n| (n.state.at, n.state.visited))
            .collect();
        // Channel (2, 3) from node 2; channel (0, 1) from home, with or without target 2 first.
        let t2 = g.target_bit(2);
        assert!(probes.contains(&(2, t2)));
        assert!(probes.contains(&(0, 0)));
        assert!(probes.contains(&(0, t2)));
    }

    #[test]
    fn root_estimate_never_decreases() {
        let g = two_critical_edges();
        let mut tree = AoTree::new(&g, &sequential()).unwrap();
        let mut last = tree.root_f();
        while !tree.step().unwrap() {
            assert!(tree.root_f() >= last - 1e-12);
            last = tree.root_f();
        }
        let (policy, _) = solve(&g, &sequential()).unwrap();
        assert!(tree.root_f() >= last - 1e-12);
        assert_eq!(tree.root_f(), policy.expected_cost_m);
        let sim = expected_cost(&policy, &g, &CostModel::default()).unwrap();
        assert!((sim - policy.expected_cost_m).abs() < 1e-9);
    }

    #[test]
    fn budget_stop_leaves_open_nodes() {
        let g = two_critical_edges();
        let (policy, stats) = solve(&g, &SolverConfig { max_expansions: 1, ..sequential() }).unwrap();
        assert!(!stats.optimal);
        assert!(!policy.optimal);
        assert!(policy.root.has_open());
        assert_eq!(stats.expansions, 1);
    }

    #[test]
    fn unreachable_target_is_infeasible() {
        let g = StochasticGraph::new(nodes(3), vec![DetEdge::new(0, 1, 1.0)], vec![], 0, vec![1, 2], 9).unwrap();
        assert_eq!(solve(&g, &sequential()).unwrap_err(), SolveError::Infeasible(vec![2]));
    }

    #[test]
    fn failed_probe_charge_raises_the_cost() {
        let g = detour(0.5);
        let base = solve(&g, &sequential()).unwrap().0.expected_cost_m;
        let cost = CostModel { failed_probe_fraction: 0.5 };
        let (policy, _) = solve(&g, &SolverConfig { cost, ..sequential() }).unwrap();
        // Half the channel on the blocked branch: 0.5 * 1 m more.
        assert!((policy.expected_cost_m - (base + 0.5)).abs() < 1e-12);
        assert!((expected_cost(&policy, &g, &cost).unwrap() - policy.expected_cost_m).abs() < 1e-12);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let g = two_critical_edges();
        let a = solve(&g, &sequential()).unwrap().0;
        let b = solve(&g, &SolverConfig { exec: Execution::Parallel, ..SolverConfig::default() }).unwrap().0;
        assert_eq!(a, b);
    }
}
