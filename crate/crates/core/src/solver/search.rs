use std::time::Instant;

use serde::Serialize;

use super::heuristic::{InfoData, Planner};
use super::policy::{ActionRecord, Outcomes, Policy, PolicyNode, StateRecord};
use super::{SolveError, SolveStats, SolverConfig};
use crate::exec;
use crate::graph::{NodeId, RobotState, StochasticGraph};
use crate::tsp::{SubsetPaths, MAX_TOUR_NODES};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Or,
    And,
    Leaf,
}

#[derive(Clone, Copy, Debug)]
struct Action {
    goto: NodeId,
    /// Targets passed on the way, as a bitmask over the graph's targets.
    via: u32,
    edge: Option<usize>,
}

#[derive(Clone, Debug)]
struct Arc {
    child: usize,
    cost: f64,
    prob: f64,
    action: Option<Action>,
}

#[derive(Clone, Debug)]
struct TreeNode {
    state: RobotState,
    kind: NodeKind,
    h: f64,
    f: f64,
    solved: bool,
    expanded: bool,
    parent: Option<usize>,
    arcs: Vec<Arc>,
    best: usize,
    edge: usize,
}

/// Read-only view of one tree node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeSummary {
    pub id: usize,
    pub state: RobotState,
    pub kind: NodeKind,
    pub h: f64,
    pub f: f64,
    pub solved: bool,
    pub expanded: bool,
}

struct Candidate {
    action: Action,
    cost: f64,
    and_state: Option<RobotState>,
    outcomes: [(RobotState, f64, f64); 2],
}

/// The AO* search tree. Nodes live in an arena and are never removed.
pub struct AoTree<'g> {
    planner: Planner<'g>,
    config: SolverConfig,
    nodes: Vec<TreeNode>,
    expansions: usize,
    started: Instant,
    stats: SolveStats,
}

impl<'g> AoTree<'g> {
    /// Builds the root. Fails when a target cannot be reached even with every
    /// stochastic edge open.
    pub fn new(g: &'g StochasticGraph, config: &SolverConfig) -> Result<Self, SolveError> {
        let planner = Planner::new(g);
        let root_state = RobotState::initial(g);
        let data = planner.info(&root_state.info);
        let missing = g.all_targets_mask() & !data.reach;
        if missing != 0 {
            return Err(SolveError::Infeasible(g.targets_in(missing)));
        }
        let mut tree = AoTree {
            planner,
            config: config.clone(),
            nodes: Vec::new(),
            expansions: 0,
            started: Instant::now(),
            stats: SolveStats { expansions: 0, tree_nodes: 0, wall_time_s: 0.0, optimal: false, root_f_m: 0.0 },
        };
        let h = tree.planner.heuristic(&root_state);
        tree.add_or(root_state, h, None);
        tree.refresh_stats();
        Ok(tree)
    }

    /// Runs until the root is solved or the budget is spent.
    pub fn search(g: &'g StochasticGraph, config: &SolverConfig) -> Result<Self, SolveError> {
        let mut tree = AoTree::new(g, config)?;
        while !tree.is_solved() && !tree.budget_spent() {
            tree.step()?;
        }
        tree.refresh_stats();
        Ok(tree)
    }

    pub fn is_solved(&self) -> bool {
        self.nodes[0].solved
    }

    fn budget_spent(&self) -> bool {
        self.expansions >= self.config.max_expansions
            || self.config.time_limit.is_some_and(|t| self.started.elapsed() >= t)
    }

    /// One select, expand, backpropagate cycle. Returns whether the root is solved.
    pub fn step(&mut self) -> Result<bool, SolveError> {
        if self.is_solved() {
            return Ok(true);
        }
        let n = self.select();
        self.expand(n)?;
        self.backprop(n);
        self.expansions += 1;
        self.refresh_stats();
        Ok(self.is_solved())
    }

    fn refresh_stats(&mut self) {
        self.stats = SolveStats {
            expansions: self.expansions,
            tree_nodes: self.nodes.len(),
            wall_time_s: self.started.elapsed().as_secs_f64(),
            optimal: self.is_solved(),
            root_f_m: self.nodes[0].f,
        };
    }

    pub fn stats(&self) -> &SolveStats {
        &self.stats
    }

    pub fn root_f(&self) -> f64 {
        self.nodes[0].f
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: usize) -> NodeSummary {
        let n = &self.nodes[id];
        NodeSummary { id, state: n.state, kind: n.kind, h: n.h, f: n.f, solved: n.solved, expanded: n.expanded }
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeSummary> + '_ {
        (0..self.nodes.len()).map(|i| self.node(i))
    }

    fn push(&mut self, node: TreeNode) -> usize {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    /// New OR node. When nothing reachable is left unvisited it is solved on
    /// the spot with the known-metric return leg to a leaf.
    fn add_or(&mut self, state: RobotState, h: f64, parent: Option<usize>) -> usize {
        let g = self.planner.g;
        let data = self.planner.info(&state.info);
        let id = self.push(TreeNode {
            state,
            kind: NodeKind::Or,
            h,
            f: h,
            solved: false,
            expanded: false,
            parent,
            arcs: Vec::new(),
            best: 0,
            edge: 0,
        });
        if data.reach & !state.visited == 0 {
            let home = data.known.dist(state.at, g.start());
            let leaf_state = RobotState { at: g.start(), ..state };
            let leaf = self.push(TreeNode {
                state: leaf_state,
                kind: NodeKind::Leaf,
                h: 0.0,
                f: 0.0,
                solved: true,
                expanded: true,
                parent: Some(id),
                arcs: Vec::new(),
                best: 0,
                edge: 0,
            });
            let node = &mut self.nodes[id];
            node.arcs.push(Arc {
                child: leaf,
                cost: home,
                prob: 1.0,
                action: Some(Action { goto: g.start(), via: 0, edge: None }),
            });
            node.expanded = true;
            node.solved = true;
            node.f = home;
        }
        id
    }

    fn select(&self) -> usize {
        let mut cur = 0;
        loop {
            let node = &self.nodes[cur];
            match node.kind {
                NodeKind::Or => {
                    if !node.expanded {
                        return cur;
                    }
                    cur = node.arcs[node.best].child;
                }
                NodeKind::And => {
                    let mut pick: Option<&Arc> = None;
                    for arc in &node.arcs {
                        if self.nodes[arc.child].solved {
                            continue;
                        }
                        if pick.is_none_or(|p| arc.prob > p.prob) {
                            pick = Some(arc);
                        }
                    }
                    cur = pick.expect("unsolved AND node has an unsolved child").child;
                }
                NodeKind::Leaf => unreachable!("leaves are always solved"),
            }
        }
    }

    fn candidates(&self, state: &RobotState, data: &InfoData) -> Result<Vec<Candidate>, SolveError> {
        let g = self.planner.g;
        let s = g.start();
        let remaining = data.reach & !state.visited;
        let uk = remaining & data.known_targets;
        let uk_nodes = g.targets_in(uk);
        if uk_nodes.len() > MAX_TOUR_NODES {
            return Err(SolveError::TooManyTargets(uk_nodes.len()));
        }
        let view = data.known.view();
        let dp = SubsetPaths::new(&view, state.at, &uk_nodes).expect("size checked");
        let full = (1usize << uk_nodes.len()) - 1;
        let to_targets = |sub: usize| -> u32 {
            (0..uk_nodes.len()).filter(|j| sub & (1 << j) != 0).fold(0, |m, j| m | g.target_bit(uk_nodes[j]))
        };
        let mut out = Vec::new();

        if remaining & !data.known_targets == 0 {
            let cost = dp.cost_to(&view, full, s);
            if cost.is_finite() {
                let done = RobotState { at: s, visited: state.visited | remaining, info: state.info };
                out.push(Candidate {
                    action: Action { goto: s, via: uk, edge: None },
                    cost,
                    and_state: None,
                    outcomes: [(done, 0.0, 1.0), (done, 0.0, 0.0)],
                });
            }
        }

        let mut cost = vec![f64::INFINITY; full + 1];
        let mut sup = vec![f64::INFINITY; full + 1];
        for e in state.info.ambiguous() {
            let edge = g.stoch_edge(e);
            let mut ends = [edge.u.min(edge.v), edge.u.max(edge.v)];
            if ends[0] == ends[1] {
                ends[1] = usize::MAX;
            }
            for x in ends {
                if x == usize::MAX || !data.in_known[x] {
                    continue;
                }
                let allowed = match uk_nodes.iter().position(|&t| t == x) {
                    Some(j) => full & !(1 << j),
                    None => full,
                };
                cost.fill(f64::INFINITY);
                for (sub, slot) in cost.iter_mut().enumerate().take(full + 1) {
                    if sub & !allowed != 0 {
                        continue;
                    }
                    // Nothing left to look for once the approach finishes the mission.
                    let after = state.visited | to_targets(sub) | g.target_bit(x);
                    if data.reach & !after == 0 {
                        continue;
                    }
                    *slot = dp.cost_to(&view, sub, x);
                }
                // Cheapest cost over all supersets within `allowed`.
                sup.copy_from_slice(&cost);
                for b in 0..uk_nodes.len() {
                    if allowed & (1 << b) == 0 {
                        continue;
                    }
                    for m in 0..=full {
                        if m & (1 << b) == 0 && m & !allowed == 0 && sup[m | (1 << b)] < sup[m] {
                            sup[m] = sup[m | (1 << b)];
                        }
                    }
                }
                for sub in 0..=full {
                    let c = cost[sub];
                    if sub & !allowed != 0 || !c.is_finite() {
                        continue;
                    }
                    let dominated = (0..uk_nodes.len())
                        .filter(|&b| allowed & !sub & (1 << b) != 0)
                        .any(|b| sup[sub | (1 << b)] <= c);
                    if dominated {
                        continue;
                    }
                    let via = to_targets(sub);
                    let visited = state.visited | via | g.target_bit(x);
                    let y = edge.other(x);
                    let p = edge.block_prob;
                    let open = RobotState { at: y, visited: visited | g.target_bit(y), info: state.info.resolve(e, true) };
                    let shut = RobotState { at: x, visited, info: state.info.resolve(e, false) };
                    out.push(Candidate {
                        action: Action { goto: x, via, edge: Some(e) },
                        cost: c,
                        and_state: Some(RobotState { at: x, visited, info: state.info }),
                        outcomes: [
                            (open, self.config.cost.probe_cost(edge.cost_m, true), 1.0 - p),
                            (shut, self.config.cost.probe_cost(edge.cost_m, false), p),
                        ],
                    });
                }
            }
        }
        Ok(out)
    }

    fn expand(&mut self, n: usize) -> Result<(), SolveError> {
        let state = self.nodes[n].state;
        let data = self.planner.info(&state.info);
        let cands = self.candidates(&state, &data)?;
        if cands.is_empty() {
            return Err(SolveError::DeadEnd(n));
        }

        let child_states: Vec<RobotState> = cands
            .iter()
            .filter(|c| c.and_state.is_some())
            .flat_map(|c| [c.outcomes[0].0, c.outcomes[1].0])
            .collect();
        let planner = &self.planner;
        let hs = exec::map(self.config.exec, &child_states, |st| planner.heuristic(st));
        let mut hs = hs.into_iter();

        for cand in cands {
            let Some(and_state) = cand.and_state else {
                let (done, _, _) = cand.outcomes[0];
                let leaf = self.push(TreeNode {
                    state: done,
                    kind: NodeKind::Leaf,
                    h: 0.0,
                    f: 0.0,
                    solved: true,
                    expanded: true,
                    parent: Some(n),
                    arcs: Vec::new(),
                    best: 0,
                    edge: 0,
                });
                self.nodes[n].arcs.push(Arc { child: leaf, cost: cand.cost, prob: 1.0, action: Some(cand.action) });
                continue;
            };
            let edge = cand.action.edge.expect("probe action");
            let and = self.push(TreeNode {
                state: and_state,
                kind: NodeKind::And,
                h: 0.0,
                f: 0.0,
                solved: false,
                expanded: true,
                parent: Some(n),
                arcs: Vec::with_capacity(2),
                best: 0,
                edge,
            });
            for (child_state, arc_cost, prob) in cand.outcomes {
                let h = hs.next().expect("one heuristic per outcome");
                let child = self.add_or(child_state, h, Some(and));
                self.nodes[and].arcs.push(Arc { child, cost: arc_cost, prob, action: None });
            }
            self.update(and);
            self.nodes[and].h = self.nodes[and].f;
            self.nodes[n].arcs.push(Arc { child: and, cost: cand.cost, prob: 1.0, action: Some(cand.action) });
        }
        self.nodes[n].expanded = true;
        Ok(())
    }

    /// Recomputes `f` and the solved flag of one node from its children.
    fn update(&mut self, id: usize) {
        let node = &self.nodes[id];
        match node.kind {
            NodeKind::Leaf => {}
            NodeKind::And => {
                let mut f = 0.0;
                let mut solved = true;
                for arc in &node.arcs {
                    let c = &self.nodes[arc.child];
                    f += arc.prob * (arc.cost + c.f);
                    solved &= c.solved;
                }
                let node = &mut self.nodes[id];
                node.f = f;
                node.solved = solved;
            }
            NodeKind::Or => {
                if node.arcs.is_empty() {
                    return;
                }
                let mut best = 0;
                let mut best_f = f64::INFINITY;
                for (i, arc) in node.arcs.iter().enumerate() {
                    let v = arc.cost + self.nodes[arc.child].f;
                    if v < best_f {
                        best_f = v;
                        best = i;
                    }
                }
                let solved = self.nodes[node.arcs[best].child].solved;
                let node = &mut self.nodes[id];
                node.best = best;
                node.solved = solved;
                // Estimates only tighten upward; a solved node takes the exact value.
                node.f = if solved { best_f } else { node.f.max(best_f) };
            }
        }
    }

    fn backprop(&mut self, from: usize) {
        let mut cur = Some(from);
        while let Some(id) = cur {
            self.update(id);
            cur = self.nodes[id].parent;
        }
    }

    /// Extracts the current best policy. Unexpanded OR nodes on it become
    /// `open` leaves; a solved root gives a complete policy.
    pub fn policy(&self) -> Policy {
        Policy { expected_cost_m: self.nodes[0].f, optimal: self.is_solved(), root: self.extract(0) }
    }

    fn state_record(&self, state: &RobotState) -> StateRecord {
        let g = self.planner.g;
        StateRecord { at: state.at, visited: g.targets_in(state.visited), info: state.info.to_symbols() }
    }

    fn extract(&self, id: usize) -> PolicyNode {
        let node = &self.nodes[id];
        let state = self.state_record(&node.state);
        match node.kind {
            NodeKind::Leaf => PolicyNode::Leaf { state, f_m: 0.0 },
            NodeKind::Or if !node.expanded => PolicyNode::Open { state, f_m: node.f },
            NodeKind::Or => {
                let arc = &node.arcs[node.best];
                let action = arc.action.expect("OR arcs carry actions");
                PolicyNode::Or {
                    state,
                    action: ActionRecord {
                        goto: action.goto,
                        via: self.via_order(&node.state, &action),
                        disambiguate: action.edge,
                    },
                    cost_m: arc.cost,
                    next: Box::new(self.extract(arc.child)),
                    f_m: node.f,
                }
            }
            NodeKind::And => {
                let g = self.planner.g;
                PolicyNode::And {
                    state,
                    edge: node.edge,
                    block_prob: g.stoch_edge(node.edge).block_prob,
                    outcomes: Outcomes {
                        traversable: Box::new(self.extract(node.arcs[0].child)),
                        untraversable: Box::new(self.extract(node.arcs[1].child)),
                    },
                    f_m: node.f,
                }
            }
        }
    }

    /// Rebuilds the visiting order of an action's intermediate targets with
    /// the same DP used during expansion, so the order matches the arc cost.
    fn via_order(&self, state: &RobotState, action: &Action) -> Vec<NodeId> {
        if action.via == 0 {
            return Vec::new();
        }
        let g = self.planner.g;
        let data = self.planner.info(&state.info);
        let uk = data.reach & !state.visited & data.known_targets;
        let uk_nodes = g.targets_in(uk);
        let view = data.known.view();
        let dp = SubsetPaths::new(&view, state.at, &uk_nodes).expect("size checked during expansion");
        let sub = uk_nodes
            .iter()
            .enumerate()
            .filter(|(_, &t)| action.via & g.target_bit(t) != 0)
            .fold(0usize, |m, (j, _)| m | (1 << j));
        dp.order_to(&view, sub, action.goto)
    }
}
