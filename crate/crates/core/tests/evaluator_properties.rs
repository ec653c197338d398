mod common;

use common::close;
use pcctp_core::baselines::{run_baseline, BaselineKind};
use pcctp_core::evaluator::{
    benchmark, expected_regret, privileged_cost, ActorKind, BenchConfig, Contender, EvalOptions, Instance,
};
use pcctp_core::generator::{instance_seed, random_instance, GeneratorConfig};
use pcctp_core::graph::{enumerate_worlds, metric_closure, InfoVector, MetricClosure, World};
use pcctp_core::solver::{solve, CostModel, SolverConfig};
use pcctp_core::tsp::{christofides_tour, held_karp_tour};
use pcctp_core::Execution;
use proptest::prelude::*;

fn sequential() -> SolverConfig {
    SolverConfig { exec: Execution::Sequential, ..SolverConfig::default() }
}

fn deterministic() -> GeneratorConfig {
    GeneratorConfig { pinch_edges: (0, 0), windy_edges: (0, 0), ..GeneratorConfig::default() }
}

/// Walks closure shortest paths, marking every target passed on the way.
struct RefWalk<'a> {
    closure: &'a MetricClosure,
    at: usize,
    cost: f64,
    left: Vec<usize>,
}

impl RefWalk<'_> {
    fn go(&mut self, t: usize) {
        for v in self.closure.path(self.at, t).unwrap() {
            self.left.retain(|&x| x != v);
        }
        self.cost += self.closure.dist(self.at, t);
        self.at = t;
    }
}

/// Nearest neighbour, lowest id on ties, then home.
fn nearest_neighbour(closure: &MetricClosure, start: usize, targets: &[usize]) -> f64 {
    let mut left = targets.to_vec();
    left.sort_unstable();
    let mut w = RefWalk { closure, at: start, cost: 0.0, left };
    while !w.left.is_empty() {
        let next = w.left.iter().copied().fold((usize::MAX, f64::INFINITY), |best, t| {
            let d = closure.dist(w.at, t);
            if d < best.1 { (t, d) } else { best }
        });
        w.go(next.0);
    }
    w.go(start);
    w.cost
}

/// Follows a fixed cyclic order, skipping targets already passed.
fn follow_cycle(closure: &MetricClosure, start: usize, cycle: &[usize]) -> f64 {
    let mut w = RefWalk { closure, at: start, cost: 0.0, left: cycle.to_vec() };
    for &t in cycle {
        if w.left.contains(&t) {
            w.go(t);
        }
    }
    w.go(start);
    w.cost
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn privileged_cost_bounds_every_actor(seed in any::<u64>()) {
        let g = random_instance(&GeneratorConfig::default(), seed).unwrap();
        let (policy, _) = solve(&g, &sequential()).unwrap();
        let cm = CostModel::default();
        for (w, _) in enumerate_worlds(&g, 9).unwrap() {
            let best = privileged_cost(&g, &w).unwrap();
            let mut contenders = vec![Contender::Policy(&policy)];
            contenders.extend(BaselineKind::ALL.map(Contender::Baseline));
            for c in contenders {
                let got = c.world_cost(&g, &w, &cm).unwrap();
                prop_assert!(got >= best - 1e-9 * best.max(1.0), "{} paid {} < {} in world {:b}", c.name(), got, best, w.bits());
            }
        }
    }

    #[test]
    fn report_is_the_probability_weighted_sum(seed in any::<u64>()) {
        let g = random_instance(&GeneratorConfig::default(), seed).unwrap();
        let opts = EvalOptions { exec: Execution::Sequential, ..EvalOptions::default() };
        for kind in BaselineKind::ALL {
            let r = expected_regret(Contender::Baseline(kind), &g, &opts).unwrap();
            let cost: f64 = r.worlds.iter().map(|w| w.probability * w.cost_m).sum();
            let regret: f64 = r.worlds.iter().map(|w| w.probability * (w.cost_m - w.privileged_m)).sum();
            prop_assert!(close(r.expected_cost_m, cost, 1e-12));
            prop_assert!(close(r.expected_regret_m, regret, 1e-12));
            prop_assert!(r.expected_regret_m >= -1e-9);
            for w in &r.worlds {
                let world = World::from_bits(g.k(), w.world_bits);
                prop_assert_eq!(w.cost_m, run_baseline(kind, &g, &world, &opts.cost).unwrap().total_cost_m);
            }
        }
    }

    #[test]
    fn policy_expected_cost_matches_its_evaluation(seed in any::<u64>()) {
        let g = random_instance(&GeneratorConfig::default(), seed).unwrap();
        let (policy, _) = solve(&g, &sequential()).unwrap();
        let r = expected_regret(Contender::Policy(&policy), &g, &EvalOptions::default()).unwrap();
        prop_assert!(close(r.expected_cost_m, policy.expected_cost_m, 1e-9));
    }

    #[test]
    fn without_uncertainty_actors_reduce_to_tours(seed in any::<u64>()) {
        let g = random_instance(&deterministic(), seed).unwrap();
        prop_assert_eq!(g.k(), 0);
        let cm = CostModel::default();
        let w = World::all_open(0);
        let closure = metric_closure(&g, &InfoVector::all_ambiguous(0));
        let m = closure.view();
        let opt = held_karp_tour(&m, g.start(), g.targets()).unwrap().cost;
        prop_assert!(close(privileged_cost(&g, &w).unwrap(), opt, 1e-12));
        let (policy, _) = solve(&g, &sequential()).unwrap();
        prop_assert!(close(policy.expected_cost_m, opt, 1e-12));
        prop_assert!(close(run_baseline(BaselineKind::Tsp, &g, &w, &cm).unwrap().total_cost_m, opt, 1e-12));
        let nn = nearest_neighbour(&closure, g.start(), g.targets());
        prop_assert!(close(run_baseline(BaselineKind::Greedy, &g, &w, &cm).unwrap().total_cost_m, nn, 1e-12));
        let tour = christofides_tour(&m, g.targets(), g.start()).unwrap();
        let mut cycle = tour.order[1..].to_vec();
        if closure.dist(g.start(), cycle[cycle.len() - 1]) < closure.dist(g.start(), cycle[0]) {
            cycle.reverse();
        }
        let cr = run_baseline(BaselineKind::Cr, &g, &w, &cm).unwrap().total_cost_m;
        prop_assert!(close(cr, follow_cycle(&closure, g.start(), &cycle), 1e-12));
        prop_assert!(cr <= tour.cost * (1.0 + 1e-12));
    }
}

#[test]
fn benchmark_is_independent_of_execution_mode() {
    let instances: Vec<Instance> = (0..24)
        .map(|i| Instance {
            id: format!("r{i:03}"),
            graph: random_instance(&GeneratorConfig::default(), instance_seed(17, i)).unwrap(),
        })
        .collect();
    let seq = BenchConfig { exec: Execution::Sequential, per_world: true, ..BenchConfig::default() };
    let par = BenchConfig { exec: Execution::Parallel, ..seq.clone() };
    let a = benchmark(&instances, &ActorKind::ALL, &seq);
    let b = benchmark(&instances, &ActorKind::ALL, &par);
    assert_eq!(a, b);
    assert!(a.failures.is_empty());
    assert_eq!(a.rows.len(), instances.len() * ActorKind::ALL.len());
}

#[test]
fn benchmark_regret_orders_by_information() {
    let instances: Vec<Instance> = (0..40)
        .map(|i| Instance {
            id: format!("r{i:03}"),
            graph: random_instance(&GeneratorConfig::default(), instance_seed(23, i)).unwrap(),
        })
        .collect();
    let result = benchmark(&instances, &ActorKind::ALL, &BenchConfig::default());
    for chunk in result.rows.chunks(ActorKind::ALL.len()) {
        let pcctp = chunk.iter().find(|r| r.actor == "pcctp").unwrap();
        for r in chunk {
            assert!(
                pcctp.expected_cost_m <= r.expected_cost_m + 1e-9 * r.expected_cost_m,
                "{}: pcctp {} beat by {} {}",
                r.instance_id,
                pcctp.expected_cost_m,
                r.actor,
                r.expected_cost_m
            );
        }
    }
}
