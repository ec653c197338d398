//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use std::collections::{BinaryHeap, HashMap};

use pcctp_core::generator::GeneratorConfig;
use pcctp_core::graph::{EdgeStatus, InfoVector, RobotState, StochasticGraph};

/// All-pairs shortest paths over deterministic edges and the stochastic edges
/// `open` accepts.
pub fn floyd_warshall(g: &StochasticGraph, open: impl Fn(usize) -> bool) -> Vec<Vec<f64>> {
    let n = g.node_count();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    let mut relax = |u: usize, v: usize, c: f64| {
        if c < d[u][v] {
            d[u][v] = c;
            d[v][u] = c;
        }
    };
    for e in g.det_edges() {
        relax(e.u, e.v, e.cost_m);
    }
    for (i, e) in g.stoch_edges().iter().enumerate() {
        if open(i) {
            relax(e.u, e.v, e.cost_m);
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// Exhaustive expectimax over the full decision tree, memoized on states.
///
/// Moves are: walk to an unvisited reachable target over known edges; walk
/// to an endpoint of an ambiguous edge and look at it. Once nothing
/// reachable is left the robot walks home; no edge is examined after the
/// last reachable target has been reached.
pub struct Expectimax<'g> {
    g: &'g StochasticGraph,
    failed_probe_fraction: f64,
    known: HashMap<InfoVector, Vec<Vec<f64>>>,
    optimistic: HashMap<InfoVector, Vec<Vec<f64>>>,
    memo: HashMap<RobotState, f64>,
}

impl<'g> Expectimax<'g> {
    pub fn new(g: &'g StochasticGraph) -> Self {
        Self::with_failed_probe(g, 0.0)
    }

    pub fn with_failed_probe(g: &'g StochasticGraph, failed_probe_fraction: f64) -> Self {
        Expectimax { g, failed_probe_fraction, known: HashMap::new(), optimistic: HashMap::new(), memo: HashMap::new() }
    }

    fn known(&mut self, info: InfoVector) -> &Vec<Vec<f64>> {
        let g = self.g;
        self.known.entry(info).or_insert_with(|| floyd_warshall(g, |i| info.get(i) == EdgeStatus::Traversable))
    }

    fn reach(&mut self, info: InfoVector) -> u32 {
        let g = self.g;
        let d = self
            .optimistic
            .entry(info)
            .or_insert_with(|| floyd_warshall(g, |i| info.get(i) != EdgeStatus::Untraversable));
        let s = g.start();
        g.targets().iter().enumerate().filter(|(_, &t)| d[s][t].is_finite()).fold(0, |m, (i, _)| m | (1 << i))
    }

    pub fn value(&mut self, state: RobotState) -> f64 {
        if let Some(&v) = self.memo.get(&state) {
            return v;
        }
        let g = self.g;
        let info = state.info;
        let a = state.at;
        let pending = self.reach(info) & !state.visited;
        let d = self.known(info).clone();
        let v = if pending == 0 {
            d[a][g.start()]
        } else {
            let mut best = f64::INFINITY;
            for (i, &t) in g.targets().iter().enumerate() {
                if pending & (1 << i) != 0 && d[a][t].is_finite() {
                    let next = RobotState { at: t, visited: state.visited | (1 << i), info };
                    best = best.min(d[a][t] + self.value(next));
                }
            }
            for e in info.ambiguous().collect::<Vec<_>>() {
                let edge = g.stoch_edge(e);
                for (x, y) in [(edge.u, edge.v), (edge.v, edge.u)] {
                    if !d[a][x].is_finite() {
                        continue;
                    }
                    let visited = state.visited | g.target_bit(x);
                    if self.reach(info) & !visited == 0 {
                        continue;
                    }
                    let open = RobotState { at: y, visited: visited | g.target_bit(y), info: info.resolve(e, true) };
                    let shut = RobotState { at: x, visited, info: info.resolve(e, false) };
                    let p = edge.block_prob;
                    let c = edge.cost_m;
                    let v = d[a][x]
                        + (1.0 - p) * (c + self.value(open))
                        + p * (self.failed_probe_fraction * c + self.value(shut));
                    best = best.min(v);
                }
            }
            best
        };
        self.memo.insert(state, v);
        v
    }
}

/// Every permutation of `items`, by Heap's algorithm.
pub fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, a, out);
            if k.is_multiple_of(2) {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
        }
    }
    let mut a = items.to_vec();
    let mut out = Vec::new();
    heap(a.len(), &mut a, &mut out);
    out
}

/// Cheapest walk `from -> perm -> to`, summed left to right.
pub fn brute_force_path(d: &[f64], n: usize, from: usize, to: usize, visit: &[usize]) -> f64 {
    let mut best = f64::INFINITY;
    for perm in permutations(visit) {
        let mut cost = 0.0;
        let mut at = from;
        for &v in &perm {
            cost += d[at * n + v];
            at = v;
        }
        cost += d[at * n + to];
        best = best.min(cost);
    }
    best
}

/// Euclidean distance matrix for points drawn from `rng`.
pub fn random_metric(rng: &mut impl rand::Rng, n: usize) -> Vec<f64> {
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random_range(0.0..100.0), rng.random_range(0.0..100.0))).collect();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            d[i * n + j] = ((pts[i].0 - pts[j].0).powi(2) + (pts[i].1 - pts[j].1).powi(2)).sqrt();
        }
    }
    d
}

/// Plain Dijkstra over an 8-connected grid. Returns the straight and
/// diagonal step counts of a shortest path.
pub fn grid_dijkstra(
    width: usize,
    height: usize,
    passable: impl Fn(usize, usize) -> bool,
    from: (usize, usize),
    to: (usize, usize),
) -> Option<(u32, u32)> {
    #[derive(PartialEq)]
    struct Item(f64, u32, u32, usize);
    impl Eq for Item {}
    impl PartialOrd for Item {
        fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(o))
        }
    }
    impl Ord for Item {
        fn cmp(&self, o: &Self) -> std::cmp::Ordering {
            o.0.total_cmp(&self.0)
        }
    }
    let len = |s: u32, dg: u32| s as f64 + dg as f64 * std::f64::consts::SQRT_2;
    let mut dist = vec![f64::INFINITY; width * height];
    let start = from.0 * width + from.1;
    dist[start] = 0.0;
    let mut heap = BinaryHeap::from([Item(0.0, 0, 0, start)]);
    while let Some(Item(d, s, dg, i)) = heap.pop() {
        if d > dist[i] {
            continue;
        }
        let (r, c) = (i / width, i % width);
        if (r, c) == to {
            return Some((s, dg));
        }
        for dr in -1i64..=1 {
            for dc in -1i64..=1 {
                if dr == 0 && dc == 0 {
                    continue;
                }
                let (nr, nc) = (r as i64 + dr, c as i64 + dc);
                if nr < 0 || nc < 0 || nr >= height as i64 || nc >= width as i64 {
                    continue;
                }
                let (nr, nc) = (nr as usize, nc as usize);
                if !passable(nr, nc) {
                    continue;
                }
                let (ns, nd) = if dr != 0 && dc != 0 { (s, dg + 1) } else { (s + 1, dg) };
                let nd_len = len(ns, nd);
                let j = nr * width + nc;
                if nd_len < dist[j] {
                    dist[j] = nd_len;
                    heap.push(Item(nd_len, ns, nd, j));
                }
            }
        }
    }
    None
}

/// Small instances for the exhaustive oracle: at most 5 nodes, k <= 3.
pub fn tiny_config() -> GeneratorConfig {
    GeneratorConfig {
        nodes: (3, 5),
        targets: (1, 4),
        pinch_edges: (1, 2),
        windy_edges: (0, 1),
        block_prob: (0.1, 0.9),
        p_wind: 0.05,
        extent_m: 1000.0,
        k_max: 3,
    }
}

/// Relative tolerance scaled to the magnitude of the compared values.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
