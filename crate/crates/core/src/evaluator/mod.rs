//! Possible-worlds evaluation: policy simulation, the privileged planner,
//! expected regret and the grouped benchmark table.

mod benchmark;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{run_baseline, ActorError, BaselineKind};
use crate::exec::{self, Execution};
use crate::graph::{
    enumerate_worlds, metric_closure, world_closure, GraphError, InfoVector, MetricClosure, NodeId,
    StochasticGraph, World, DEFAULT_K_MAX,
};
use crate::solver::{CostModel, Policy, PolicyNode, SolveError};
use crate::tsp::{held_karp_tour, TspError};

pub use benchmark::{benchmark, ActorKind, BenchConfig, BenchRow, BenchmarkResult, Cell, Failure, Instance};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Tsp(#[from] TspError),
    #[error(transparent)]
    Actor(#[from] ActorError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("policy integrity: {0}")]
    Integrity(String),
}

fn integrity(msg: impl Into<String>) -> EvalError {
    EvalError::Integrity(msg.into())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome {
    pub cost_m: f64,
    /// Every node passed, start and end included.
    pub trace: Vec<NodeId>,
}

/// Walks the policy in one world. Arc costs are recomputed from the graph and
/// checked against the stored ones.
pub fn simulate_policy(
    policy: &Policy,
    g: &StochasticGraph,
    world: &World,
    cost_model: &CostModel,
) -> Result<SimOutcome, EvalError> {
    if world.len() != g.k() {
        return Err(integrity(format!("world has {} edges, graph has {}", world.len(), g.k())));
    }
    let mut closures: HashMap<InfoVector, MetricClosure> = HashMap::new();
    let mut info = InfoVector::all_ambiguous(g.k());
    let mut at = g.start();
    let mut cost = 0.0;
    let mut trace = vec![at];
    let mut node = &policy.root;
    loop {
        let state = node.state();
        if state.at != at || state.info != info.to_symbols() {
            return Err(integrity(format!(
                "policy state ({}, {}) does not match the simulated ({at}, {})",
                state.at,
                state.info,
                info.to_symbols()
            )));
        }
        match node {
            PolicyNode::Or { action, cost_m, next, .. } => {
                let closure = closures.entry(info).or_insert_with(|| metric_closure(g, &info));
                let mut leg = 0.0;
                for &v in action.via.iter().chain(std::iter::once(&action.goto)) {
                    if v >= g.node_count() {
                        return Err(integrity(format!("node {v} out of range")));
                    }
                    let d = closure.dist(at, v);
                    if !d.is_finite() {
                        return Err(integrity(format!("no known path from {at} to {v}")));
                    }
                    leg += d;
                    trace.extend(closure.path(at, v).expect("finite distance").into_iter().skip(1));
                    at = v;
                }
                if (leg - cost_m).abs() > 1e-6 * leg.max(1.0) {
                    return Err(integrity(format!("stored arc cost {cost_m} differs from recomputed {leg}")));
                }
                cost += leg;
                node = next;
            }
            PolicyNode::And { edge, outcomes, .. } => {
                let e = *edge;
                if e >= g.k() || !info.is_ambiguous(e) {
                    return Err(integrity(format!("edge {e} is not an ambiguous stochastic edge")));
                }
                let se = g.stoch_edge(e);
                if at != se.u && at != se.v {
                    return Err(integrity(format!("robot at {at} is not on edge {e}")));
                }
                let open = world.is_traversable(e);
                cost += cost_model.probe_cost(se.cost_m, open);
                info = info.resolve(e, open);
                if open {
                    at = se.other(at);
                    trace.push(at);
                    node = &outcomes.traversable;
                } else {
                    node = &outcomes.untraversable;
                }
            }
            PolicyNode::Leaf { .. } => {
                if at != g.start() {
                    return Err(integrity(format!("leaf reached away from the start, at {at}")));
                }
                return Ok(SimOutcome { cost_m: cost, trace });
            }
            PolicyNode::Open { .. } => return Err(integrity("policy reaches an unsolved branch")),
        }
    }
}

/// Optimal tour in a fully known world over the targets reachable there.
pub fn privileged_cost(g: &StochasticGraph, world: &World) -> Result<f64, EvalError> {
    let closure = world_closure(g, world);
    let s = g.start();
    let reachable: Vec<NodeId> = g.targets().iter().copied().filter(|&t| closure.dist(s, t).is_finite()).collect();
    Ok(held_karp_tour(&closure.view(), s, &reachable)?.cost)
}

/// Something that can be evaluated world by world.
#[derive(Clone, Copy, Debug)]
pub enum Contender<'a> {
    Policy(&'a Policy),
    Baseline(BaselineKind),
}

impl Contender<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            Contender::Policy(_) => "pcctp",
            Contender::Baseline(k) => k.name(),
        }
    }

    pub fn world_cost(&self, g: &StochasticGraph, world: &World, cost: &CostModel) -> Result<f64, EvalError> {
        match self {
            Contender::Policy(p) => Ok(simulate_policy(p, g, world, cost)?.cost_m),
            Contender::Baseline(k) => Ok(run_baseline(*k, g, world, cost)?.total_cost_m),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorldRow {
    /// Bit `i` set means stochastic edge `i` is blocked.
    pub world_bits: u32,
    pub probability: f64,
    pub cost_m: f64,
    pub privileged_m: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub actor: String,
    pub n_targets: usize,
    pub n_windy: usize,
    pub k: usize,
    pub expected_cost_m: f64,
    pub expected_regret_m: f64,
    pub worlds: Vec<WorldRow>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalOptions {
    pub exec: Execution,
    pub cost: CostModel,
    pub k_max: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { exec: Execution::default(), cost: CostModel::default(), k_max: DEFAULT_K_MAX }
    }
}

/// Privileged costs for a list of worlds, in the same order.
pub fn privileged_costs(g: &StochasticGraph, worlds: &[(World, f64)], exec: Execution) -> Result<Vec<f64>, EvalError> {
    exec::map(exec, worlds, |(w, _)| privileged_cost(g, w)).into_iter().collect()
}

/// Sums `p(w) * (cost(w) - privileged(w))` over every world.
pub fn expected_regret(contender: Contender<'_>, g: &StochasticGraph, opts: &EvalOptions) -> Result<EvalReport, EvalError> {
    let worlds = enumerate_worlds(g, opts.k_max)?;
    let privileged = privileged_costs(g, &worlds, opts.exec)?;
    report_against(contender, g, &worlds, &privileged, opts)
}

pub(crate) fn report_against(
    contender: Contender<'_>,
    g: &StochasticGraph,
    worlds: &[(World, f64)],
    privileged: &[f64],
    opts: &EvalOptions,
) -> Result<EvalReport, EvalError> {
    let costs: Result<Vec<f64>, EvalError> =
        exec::map(opts.exec, worlds, |(w, _)| contender.world_cost(g, w, &opts.cost)).into_iter().collect();
    let costs = costs?;
    let mut expected_cost = 0.0;
    let mut expected_regret = 0.0;
    let mut rows = Vec::with_capacity(worlds.len());
    for (((w, p), &c), &pc) in worlds.iter().zip(&costs).zip(privileged) {
        expected_cost += p * c;
        expected_regret += p * (c - pc);
        rows.push(WorldRow { world_bits: w.bits(), probability: *p, cost_m: c, privileged_m: pc });
    }
    Ok(EvalReport {
        actor: contender.name().to_string(),
        n_targets: g.targets().len(),
        n_windy: g.windy_count(),
        k: g.k(),
        expected_cost_m: expected_cost,
        expected_regret_m: expected_regret,
        worlds: rows,
    })
}
