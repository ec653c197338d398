use super::{MetricView, TspError};

/// Cap on must-visit nodes plus groups.
pub const MAX_SET_TSP_ITEMS: usize = 16;

/// Cheapest closed walk from `start` that visits every `must_visit` node and
/// at least one member of each group.
pub fn set_tsp_heuristic_cost(
    m: &MetricView<'_>,
    start: usize,
    must_visit: &[usize],
    groups: &[Vec<usize>],
) -> Result<f64, TspError> {
    set_tsp_path_cost(m, start, start, must_visit, groups)
}

/// Open-path variant: leaves `from`, satisfies every item, ends at `to`.
/// Standing at `from` already satisfies any item containing it.
///
/// Solved exactly by DP over (satisfied-items mask, last node), where the
/// candidate nodes are the union of all item members.
pub fn set_tsp_path_cost(
    m: &MetricView<'_>,
    from: usize,
    to: usize,
    must_visit: &[usize],
    groups: &[Vec<usize>],
) -> Result<f64, TspError> {
    let mut items: Vec<Vec<usize>> = must_visit.iter().map(|&v| vec![v]).collect();
    for (i, g) in groups.iter().enumerate() {
        if g.is_empty() {
            return Err(TspError::EmptyGroup(i));
        }
        items.push(g.clone());
    }
    if items.len() > MAX_SET_TSP_ITEMS {
        return Err(TspError::TooLarge { n: items.len(), cap: MAX_SET_TSP_ITEMS });
    }
    for &v in must_visit {
        if !m.get(from, v).is_finite() {
            return Err(TspError::Unreachable { from, to: v });
        }
    }

    let mut nodes: Vec<usize> = items.iter().flatten().copied().collect();
    nodes.sort_unstable();
    nodes.dedup();
    let cover = |v: usize| -> usize {
        items
            .iter()
            .enumerate()
            .filter(|(_, members)| members.contains(&v))
            .fold(0, |acc, (i, _)| acc | (1 << i))
    };
    let covers: Vec<usize> = nodes.iter().map(|&v| cover(v)).collect();
    let full = (1usize << items.len()) - 1;
    let initial = cover(from);
    if initial == full {
        return Ok(m.get(from, to));
    }

    let n = nodes.len();
    let mut best = vec![f64::INFINITY; (full + 1) * n];
    for (j, &v) in nodes.iter().enumerate() {
        let mask = initial | covers[j];
        if mask == initial {
            continue;
        }
        let c = m.get(from, v);
        if c < best[mask * n + j] {
            best[mask * n + j] = c;
        }
    }
    for mask in 0..full {
        for j in 0..n {
            let here = best[mask * n + j];
            if here == f64::INFINITY {
                continue;
            }
            for l in 0..n {
                let next = mask | covers[l];
                if next == mask {
                    continue;
                }
                let cand = here + m.get(nodes[j], nodes[l]);
                if cand < best[next * n + l] {
                    best[next * n + l] = cand;
                }
            }
        }
    }
    let cost = (0..n)
        .map(|j| best[full * n + j] + m.get(nodes[j], to))
        .fold(f64::INFINITY, f64::min);
    if cost.is_finite() {
        Ok(cost)
    } else {
        Err(TspError::Infeasible)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tsp::held_karp_tour;

    fn line_metric(xs: &[f64]) -> Vec<f64> {
        let n = xs.len();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                d[i * n + j] = (xs[i] - xs[j]).abs();
            }
        }
        d
    }

    #[test]
    fn no_groups_is_a_tour() {
        let d = line_metric(&[0.0, 3.0, -2.0, 7.0]);
        let m = MetricView::new(&d, 4);
        let tour = held_karp_tour(&m, 0, &[1, 2, 3]).unwrap().cost;
        assert_eq!(set_tsp_heuristic_cost(&m, 0, &[1, 2, 3], &[]).unwrap(), tour);
    }

    #[test]
    fn singleton_group_forces_the_node() {
        let d = line_metric(&[0.0, 3.0, -2.0, 7.0]);
        let m = MetricView::new(&d, 4);
        let tour = held_karp_tour(&m, 0, &[1, 3]).unwrap().cost;
        assert_eq!(set_tsp_heuristic_cost(&m, 0, &[1], &[vec![3]]).unwrap(), tour);
    }

    #[test]
    fn group_picks_the_cheaper_member() {
        let d = line_metric(&[0.0, 3.0, -2.0, 7.0]);
        let m = MetricView::new(&d, 4);
        assert_eq!(set_tsp_heuristic_cost(&m, 0, &[1], &[vec![2, 3]]).unwrap(), 10.0);
    }

    #[test]
    fn standing_on_a_member_satisfies_the_group() {
        let d = line_metric(&[0.0, 3.0, -2.0]);
        let m = MetricView::new(&d, 3);
        assert_eq!(set_tsp_path_cost(&m, 2, 0, &[], &[vec![2, 1]]).unwrap(), 2.0);
    }

    #[test]
    fn errors() {
        let d = line_metric(&[0.0, 1.0]);
        let m = MetricView::new(&d, 2);
        assert_eq!(set_tsp_heuristic_cost(&m, 0, &[], &[vec![]]), Err(TspError::EmptyGroup(0)));
        let d = vec![0.0, f64::INFINITY, f64::INFINITY, 0.0];
        let m = MetricView::new(&d, 2);
        assert_eq!(set_tsp_heuristic_cost(&m, 0, &[], &[vec![1]]), Err(TspError::Infeasible));
    }
}
