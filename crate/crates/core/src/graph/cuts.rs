use std::collections::BTreeMap;

use super::closure::component;
use super::{EdgeRef, NodeId, StochasticGraph};

/// Largest cut cardinality enumerated; bigger cuts are treated as never
/// separating the target.
pub const MAX_CUT_SIZE: usize = 4;

/// Minimal sets of stochastic edges whose joint blockage disconnects each
/// target from the start, with deterministic edges assumed intact.
///
/// Cuts are listed by increasing size, lexicographically within a size. A
/// target reachable through deterministic edges alone maps to an empty list.
pub fn critical_edge_sets(g: &StochasticGraph) -> BTreeMap<NodeId, Vec<Vec<usize>>> {
    let k = g.k();
    let mut candidates: Vec<Vec<usize>> = Vec::new();
    for size in 1..=MAX_CUT_SIZE.min(k) {
        combinations(k, size, &mut |c| candidates.push(c.to_vec()));
    }

    let mut out = BTreeMap::new();
    for &t in g.targets() {
        let mut cuts: Vec<Vec<usize>> = Vec::new();
        let det_only = component(g, g.start(), |e| matches!(e, EdgeRef::Det(_)));
        if !det_only[t] {
            let all_open = component(g, g.start(), |_| true);
            if !all_open[t] {
                cuts.push(Vec::new());
            } else {
                for cut in &candidates {
                    if cuts.iter().any(|c| c.iter().all(|e| cut.contains(e))) {
                        continue;
                    }
                    let seen = component(g, g.start(), |e| match e {
                        EdgeRef::Det(_) => true,
                        EdgeRef::Stoch(i) => !cut.contains(&i),
                    });
                    if !seen[t] {
                        cuts.push(cut.clone());
                    }
                }
            }
        }
        out.insert(t, cuts);
    }
    out
}

fn combinations(n: usize, size: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, size: usize, buf: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if buf.len() == size {
            f(buf);
            return;
        }
        for i in start..n {
            buf.push(i);
            rec(i + 1, n, size, buf, f);
            buf.pop();
        }
    }
    rec(0, n, size, &mut Vec::with_capacity(size), f);
}
