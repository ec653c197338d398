use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{privileged_costs, report_against, Contender, EvalError, EvalOptions, WorldRow};
use crate::baselines::BaselineKind;
use crate::exec::{self, Execution};
use crate::graph::{enumerate_worlds, StochasticGraph, DEFAULT_K_MAX};
use crate::solver::{solve, CostModel, SolverConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActorKind {
    Pcctp,
    Greedy,
    Tsp,
    Cr,
}

impl ActorKind {
    pub const ALL: [ActorKind; 4] = [ActorKind::Pcctp, ActorKind::Greedy, ActorKind::Tsp, ActorKind::Cr];

    pub fn name(self) -> &'static str {
        match self {
            ActorKind::Pcctp => "pcctp",
            ActorKind::Greedy => "greedy",
            ActorKind::Tsp => "tsp",
            ActorKind::Cr => "cr",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        ActorKind::ALL.into_iter().find(|a| a.name() == s)
    }
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub id: String,
    pub graph: StochasticGraph,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub solver: SolverConfig,
    pub exec: Execution,
    pub cost: CostModel,
    pub k_max: usize,
    /// Keep the per-world rows in each result row.
    pub per_world: bool,
    /// Record solver wall time; otherwise the column is 0 so output is reproducible.
    pub timing: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            solver: SolverConfig { exec: Execution::Sequential, ..SolverConfig::default() },
            exec: Execution::default(),
            cost: CostModel::default(),
            k_max: DEFAULT_K_MAX,
            per_world: false,
            timing: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub actor: String,
    pub instance_id: String,
    pub n_targets: usize,
    pub n_windy: usize,
    pub k: usize,
    pub expected_cost_m: f64,
    pub expected_regret_m: f64,
    pub solve_time_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub worlds: Option<Vec<WorldRow>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub actor: String,
    pub instance_id: String,
    pub error: String,
}

/// Mean expected regret of one actor over the instances sharing a target
/// count and windy-edge count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub actor: String,
    pub n_targets: usize,
    pub n_windy: usize,
    pub instances: usize,
    pub mean_regret_m: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkResult {
    pub rows: Vec<BenchRow>,
    pub cells: Vec<Cell>,
    pub failures: Vec<Failure>,
}

/// Evaluates every actor on every instance. Instances run concurrently;
/// rows come out in instance order, then actor order. Failures are collected
/// rather than aborting the run.
pub fn benchmark(instances: &[Instance], actors: &[ActorKind], config: &BenchConfig) -> BenchmarkResult {
    let per_instance = exec::map(config.exec, instances, |inst| run_instance(inst, actors, config));
    let mut result = BenchmarkResult::default();
    for (rows, failures) in per_instance {
        result.rows.extend(rows);
        result.failures.extend(failures);
    }
    result.cells = cells(&result.rows, actors);
    result
}

fn run_instance(inst: &Instance, actors: &[ActorKind], config: &BenchConfig) -> (Vec<BenchRow>, Vec<Failure>) {
    let g = &inst.graph;
    let opts = EvalOptions { exec: Execution::Sequential, cost: config.cost, k_max: config.k_max };
    let fail = |actor: ActorKind, error: String| Failure {
        actor: actor.name().to_string(),
        instance_id: inst.id.clone(),
        error,
    };
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let prepared = enumerate_worlds(g, config.k_max)
        .map_err(EvalError::from)
        .and_then(|w| privileged_costs(g, &w, Execution::Sequential).map(|p| (w, p)));
    let (worlds, privileged) = match prepared {
        Ok(x) => x,
        Err(e) => {
            failures.extend(actors.iter().map(|&a| fail(a, e.to_string())));
            return (rows, failures);
        }
    };
    for &actor in actors {
        let started = Instant::now();
        let outcome = match actor {
            ActorKind::Pcctp => {
                let solver = SolverConfig { cost: config.cost, ..config.solver.clone() };
                match solve(g, &solver) {
                    Ok((policy, stats)) if stats.optimal => {
                        let secs = started.elapsed().as_secs_f64();
                        report_against(Contender::Policy(&policy), g, &worlds, &privileged, &opts).map(|r| (r, secs))
                    }
                    Ok((_, stats)) => {
                        failures.push(fail(actor, format!("search budget exhausted after {} expansions", stats.expansions)));
                        continue;
                    }
                    Err(e) => Err(e.into()),
                }
            }
            ActorKind::Greedy | ActorKind::Tsp | ActorKind::Cr => {
                let kind = match actor {
                    ActorKind::Greedy => BaselineKind::Greedy,
                    ActorKind::Tsp => BaselineKind::Tsp,
                    _ => BaselineKind::Cr,
                };
                report_against(Contender::Baseline(kind), g, &worlds, &privileged, &opts).map(|r| (r, 0.0))
            }
        };
        match outcome {
            Ok((report, secs)) => rows.push(BenchRow {
                actor: actor.name().to_string(),
                instance_id: inst.id.clone(),
                n_targets: report.n_targets,
                n_windy: report.n_windy,
                k: report.k,
                expected_cost_m: report.expected_cost_m,
                expected_regret_m: report.expected_regret_m,
                solve_time_s: if config.timing { secs } else { 0.0 },
                worlds: config.per_world.then_some(report.worlds),
            }),
            Err(e) => failures.push(fail(actor, e.to_string())),
        }
    }
    (rows, failures)
}

fn cells(rows: &[BenchRow], actors: &[ActorKind]) -> Vec<Cell> {
    let mut keys: Vec<(usize, usize, usize)> = Vec::new();
    for r in rows {
        let a = actors.iter().position(|x| x.name() == r.actor).unwrap_or(usize::MAX);
        keys.push((a, r.n_targets, r.n_windy));
    }
    let mut unique = keys.clone();
    unique.sort_unstable();
    unique.dedup();
    unique
        .into_iter()
        .map(|key| {
            let mut sum = 0.0;
            let mut n = 0;
            let mut actor = String::new();
            for (r, k) in rows.iter().zip(&keys) {
                if *k == key {
                    sum += r.expected_regret_m;
                    n += 1;
                    actor.clone_from(&r.actor);
                }
            }
            Cell { actor, n_targets: key.1, n_windy: key.2, instances: n, mean_regret_m: sum / n as f64 }
        })
        .collect()
}
