use std::collections::HashMap;
use std::rc::Rc;

use super::{ActorStep, BaselineKind, StepAction, Trajectory};
use crate::graph::{
    metric_closure, optimistic_closure, reachable_targets, EdgeRef, InfoVector, MetricClosure, NodeId,
    StochasticGraph, World,
};
use crate::solver::CostModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(super) enum Advance {
    Arrived,
    /// Looked at an ambiguous edge and crossed it.
    Crossed,
    /// Looked at an ambiguous edge and found it blocked.
    Blocked,
}

/// Robot simulator shared by the baseline actors.
pub(super) struct Walker<'a> {
    g: &'a StochasticGraph,
    world: &'a World,
    cost_model: CostModel,
    at: NodeId,
    visited: u32,
    abandoned: u32,
    info: InfoVector,
    reach: u32,
    cost: f64,
    steps: Vec<ActorStep>,
    order: Vec<NodeId>,
    optimistic: HashMap<InfoVector, Rc<MetricClosure>>,
}

impl<'a> Walker<'a> {
    pub fn new(g: &'a StochasticGraph, world: &'a World, cost_model: CostModel) -> Self {
        let info = InfoVector::all_ambiguous(g.k());
        let reach = reachable_targets(g, &info);
        Walker {
            g,
            world,
            cost_model,
            at: g.start(),
            visited: 0,
            abandoned: g.all_targets_mask() & !reach,
            info,
            reach,
            cost: 0.0,
            steps: Vec::new(),
            order: Vec::new(),
            optimistic: HashMap::new(),
        }
    }

    pub fn at(&self) -> NodeId {
        self.at
    }

    /// Unvisited targets still reachable under the optimistic assumption.
    pub fn remaining(&self) -> u32 {
        self.reach & !self.visited
    }

    pub fn is_pending(&self, t: NodeId) -> bool {
        self.remaining() & self.g.target_bit(t) != 0
    }

    pub fn optimistic(&mut self) -> Rc<MetricClosure> {
        let (g, info) = (self.g, self.info);
        self.optimistic.entry(info).or_insert_with(|| Rc::new(optimistic_closure(g, &info))).clone()
    }

    fn arrive(&mut self, v: NodeId) {
        self.at = v;
        let bit = self.g.target_bit(v);
        if bit != 0 && self.visited & bit == 0 {
            self.visited |= bit;
            self.order.push(v);
        }
    }

    fn record(&mut self, action: StepAction, cost: f64) {
        self.cost += cost;
        self.steps.push(ActorStep { action, cost_m: cost, cumulative_m: self.cost });
    }

    /// Walks the optimistic shortest path to `t`, stopping at the first
    /// ambiguous edge to look at it.
    pub fn advance_toward(&mut self, t: NodeId) -> Advance {
        let opt = self.optimistic();
        let edges = opt.path_edges(self.at, t).expect("target is optimistically reachable");
        let mut leg = vec![self.at];
        let mut leg_cost = 0.0;
        for (_, v, e) in edges {
            if let EdgeRef::Stoch(i) = e {
                if self.info.is_ambiguous(i) {
                    if leg.len() > 1 {
                        self.record(StepAction::Travel { nodes: leg }, leg_cost);
                    }
                    return self.disambiguate(i, v);
                }
            }
            leg_cost += self.g.edge_cost(e);
            leg.push(v);
            self.arrive(v);
        }
        if leg.len() > 1 {
            self.record(StepAction::Travel { nodes: leg }, leg_cost);
        }
        Advance::Arrived
    }

    fn disambiguate(&mut self, i: usize, far: NodeId) -> Advance {
        let traversable = self.world.is_traversable(i);
        let c = self.cost_model.probe_cost(self.g.stoch_edge(i).cost_m, traversable);
        self.info = self.info.resolve(i, traversable);
        self.record(StepAction::Disambiguate { edge: i, traversable }, c);
        if traversable {
            self.arrive(far);
            return Advance::Crossed;
        }
        self.reach = reachable_targets(self.g, &self.info);
        let lost = self.g.all_targets_mask() & !self.reach & !self.visited & !self.abandoned;
        for t in self.g.targets_in(lost) {
            self.record(StepAction::GiveUp { target: t }, 0.0);
        }
        self.abandoned |= lost;
        Advance::Blocked
    }

    /// Returns home over known edges and closes the trajectory.
    pub fn finish(mut self, actor: BaselineKind) -> Trajectory {
        let known = metric_closure(self.g, &self.info);
        let s = self.g.start();
        if self.at != s {
            let nodes = known.path(self.at, s).expect("the way back is known");
            let c = known.dist(self.at, s);
            self.record(StepAction::Travel { nodes }, c);
            self.at = s;
        }
        self.record(StepAction::Finish, 0.0);
        Trajectory { actor, steps: self.steps, total_cost_m: self.cost, visited: self.order, end: self.at }
    }
}
