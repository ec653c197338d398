// Held-Karp over subsets: best[S][j] is the cheapest walk that leaves the
// origin, visits exactly the nodes in S and stops at j in S. Tours close back
// to the origin; paths finish at a separate endpoint.

use super::{ensure_finite, MetricView, Route, TspError};

pub const MAX_TOUR_NODES: usize = 20;

const NO_PARENT: u8 = u8::MAX;

/// Subset DP from a fixed origin over a list of intermediate nodes, queried
/// for any subset and any final endpoint.
#[derive(Clone, Debug)]
pub struct SubsetPaths {
    origin: usize,
    nodes: Vec<usize>,
    best: Vec<f64>,
    parent: Vec<u8>,
}

impl SubsetPaths {
    /// Infinite distances are allowed; unreachable subsets stay at `+inf`.
    pub fn new(m: &MetricView<'_>, origin: usize, nodes: &[usize]) -> Result<Self, TspError> {
        let k = nodes.len();
        if k > MAX_TOUR_NODES {
            return Err(TspError::TooLarge { n: k, cap: MAX_TOUR_NODES });
        }
        let full = 1usize << k;
        let mut best = vec![f64::INFINITY; full * k];
        let mut parent = vec![NO_PARENT; full * k];
        for (j, &v) in nodes.iter().enumerate() {
            best[(1 << j) * k + j] = m.get(origin, v);
        }
        for mask in 1..full {
            for j in 0..k {
                if mask & (1 << j) == 0 {
                    continue;
                }
                let here = best[mask * k + j];
                if here == f64::INFINITY {
                    continue;
                }
                for l in 0..k {
                    if mask & (1 << l) != 0 {
                        continue;
                    }
                    let next = mask | (1 << l);
                    let cand = here + m.get(nodes[j], nodes[l]);
                    // Strict comparison keeps the lowest predecessor index on ties.
                    if cand < best[next * k + l] {
                        best[next * k + l] = cand;
                        parent[next * k + l] = j as u8;
                    }
                }
            }
        }
        Ok(SubsetPaths { origin, nodes: nodes.to_vec(), best, parent })
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    /// Cheapest walk visiting the subset `mask` (bits index `nodes()`) and
    /// ending at `end`.
    pub fn cost_to(&self, m: &MetricView<'_>, mask: usize, end: usize) -> f64 {
        self.best_last(m, mask, end).0
    }

    fn best_last(&self, m: &MetricView<'_>, mask: usize, end: usize) -> (f64, Option<usize>) {
        if mask == 0 {
            return (m.get(self.origin, end), None);
        }
        let k = self.nodes.len();
        let mut best = (f64::INFINITY, None);
        for j in 0..k {
            if mask & (1 << j) == 0 {
                continue;
            }
            let cand = self.best[mask * k + j] + m.get(self.nodes[j], end);
            if cand < best.0 {
                best = (cand, Some(j));
            }
        }
        best
    }

    /// Visiting order of the intermediate nodes (origin and end excluded).
    pub fn order_to(&self, m: &MetricView<'_>, mask: usize, end: usize) -> Vec<usize> {
        let k = self.nodes.len();
        let mut order = Vec::new();
        let (_, mut last) = self.best_last(m, mask, end);
        let mut mask = mask;
        while let Some(j) = last {
            order.push(self.nodes[j]);
            let p = self.parent[mask * k + j];
            mask &= !(1 << j);
            last = (p != NO_PARENT).then_some(p as usize);
        }
        order.reverse();
        order
    }
}

fn normalized(visit: &[usize], exclude: &[usize]) -> Vec<usize> {
    let mut v: Vec<usize> = visit.iter().copied().filter(|x| !exclude.contains(x)).collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Minimal closed tour from `start` through every node of `visit`.
pub fn held_karp_tour(m: &MetricView<'_>, start: usize, visit: &[usize]) -> Result<Route, TspError> {
    held_karp_path(m, start, start, visit)
}

/// Minimal open path from `from` to `to` through every node of `visit`.
/// With `from == to` this is the closed tour.
pub fn held_karp_path(
    m: &MetricView<'_>,
    from: usize,
    to: usize,
    visit: &[usize],
) -> Result<Route, TspError> {
    let visit = normalized(visit, &[from, to]);
    if visit.len() > MAX_TOUR_NODES {
        return Err(TspError::TooLarge { n: visit.len(), cap: MAX_TOUR_NODES });
    }
    let mut all = visit.clone();
    all.push(from);
    all.push(to);
    ensure_finite(m, &all)?;
    let dp = SubsetPaths::new(m, from, &visit)?;
    let full = (1usize << visit.len()) - 1;
    let cost = dp.cost_to(m, full, to);
    let mut order = vec![from];
    order.extend(dp.order_to(m, full, to));
    if to != from {
        order.push(to);
    }
    Ok(Route { cost, order })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn euclid(points: &[(f64, f64)]) -> Vec<f64> {
        let n = points.len();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                d[i * n + j] = ((points[i].0 - points[j].0).powi(2) + (points[i].1 - points[j].1).powi(2)).sqrt();
            }
        }
        d
    }

    #[test]
    fn empty_visit_set() {
        let d = euclid(&[(0.0, 0.0), (3.0, 4.0)]);
        let m = MetricView::new(&d, 2);
        assert_eq!(held_karp_tour(&m, 0, &[]).unwrap(), Route { cost: 0.0, order: vec![0] });
        let p = held_karp_path(&m, 0, 1, &[]).unwrap();
        assert_eq!(p.cost, 5.0);
        assert_eq!(p.order, vec![0, 1]);
    }

    #[test]
    fn unit_square_perimeter() {
        let d = euclid(&[(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)]);
        let m = MetricView::new(&d, 4);
        let r = held_karp_tour(&m, 0, &[1, 2, 3]).unwrap();
        assert_eq!(r.cost, 4.0);
        assert!(r.order == vec![0, 2, 1, 3] || r.order == vec![0, 3, 1, 2], "{:?}", r.order);
    }

    #[test]
    fn collinear_path() {
        let d = euclid(&[(0.0, 0.0), (2.0, 0.0), (5.0, 0.0)]);
        let m = MetricView::new(&d, 3);
        let r = held_karp_path(&m, 0, 2, &[1]).unwrap();
        assert_eq!(r.cost, 5.0);
        assert_eq!(r.order, vec![0, 1, 2]);
    }

    #[test]
    fn infinite_entries_are_reported() {
        let d = vec![0.0, f64::INFINITY, f64::INFINITY, 0.0];
        let m = MetricView::new(&d, 2);
        assert!(matches!(held_karp_tour(&m, 0, &[1]), Err(TspError::Unreachable { .. })));
    }

    #[test]
    fn cap_is_enforced() {
        let d = vec![1.0; 22 * 22];
        let m = MetricView::new(&d, 22);
        let visit: Vec<usize> = (1..22).collect();
        assert_eq!(held_karp_tour(&m, 0, &visit), Err(TspError::TooLarge { n: 21, cap: 20 }));
    }
}
