use super::{ensure_finite, MetricView, Route, TspError};

/// Exact matching is done by bitmask DP, which caps the odd-degree set.
pub const MAX_ODD_NODES: usize = 16;

/// Christofides tour over `nodes` (start is added if missing). `order` is the
/// cyclic visiting order beginning at `start`.
pub fn christofides_tour(m: &MetricView<'_>, nodes: &[usize], start: usize) -> Result<Route, TspError> {
    let mut pts: Vec<usize> = nodes.iter().copied().filter(|&v| v != start).collect();
    pts.sort_unstable();
    pts.dedup();
    pts.insert(0, start);
    ensure_finite(m, &pts)?;
    let n = pts.len();
    if n <= 2 {
        let cost = if n == 2 { 2.0 * m.get(pts[0], pts[1]) } else { 0.0 };
        return Ok(Route { cost, order: pts });
    }
    let d = |a: usize, b: usize| m.get(pts[a], pts[b]);

    // Prim from the start, lowest index on ties.
    let mut in_tree = vec![false; n];
    let mut key = vec![f64::INFINITY; n];
    let mut link = vec![0usize; n];
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(2 * n);
    key[0] = 0.0;
    for _ in 0..n {
        let mut u = usize::MAX;
        for v in 0..n {
            if !in_tree[v] && (u == usize::MAX || key[v] < key[u]) {
                u = v;
            }
        }
        in_tree[u] = true;
        if u != 0 {
            edges.push((link[u], u));
        }
        for v in 0..n {
            if !in_tree[v] && d(u, v) < key[v] {
                key[v] = d(u, v);
                link[v] = u;
            }
        }
    }

    let mut degree = vec![0usize; n];
    for &(a, b) in &edges {
        degree[a] += 1;
        degree[b] += 1;
    }
    let odd: Vec<usize> = (0..n).filter(|&v| degree[v] % 2 == 1).collect();
    if odd.len() > MAX_ODD_NODES {
        return Err(TspError::TooManyOddNodes { n: odd.len(), cap: MAX_ODD_NODES });
    }
    edges.extend(min_weight_perfect_matching(&odd, &d));

    // Hierholzer on the multigraph, always taking the lowest unused edge id.
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, &(a, b)) in edges.iter().enumerate() {
        incident[a].push(i);
        incident[b].push(i);
    }
    let mut used = vec![false; edges.len()];
    let mut cursor = vec![0usize; n];
    let mut stack = vec![0usize];
    let mut circuit = Vec::with_capacity(edges.len() + 1);
    while let Some(&u) = stack.last() {
        while cursor[u] < incident[u].len() && used[incident[u][cursor[u]]] {
            cursor[u] += 1;
        }
        if cursor[u] == incident[u].len() {
            circuit.push(u);
            stack.pop();
        } else {
            let e = incident[u][cursor[u]];
            used[e] = true;
            let (a, b) = edges[e];
            stack.push(if a == u { b } else { a });
        }
    }
    circuit.reverse();

    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for v in circuit {
        if !seen[v] {
            seen[v] = true;
            order.push(v);
        }
    }
    let cost = order.iter().zip(order.iter().cycle().skip(1)).map(|(&a, &b)| d(a, b)).sum();
    Ok(Route { cost, order: order.into_iter().map(|i| pts[i]).collect() })
}

/// Exact minimum-weight perfect matching on an even vertex list.
fn min_weight_perfect_matching(odd: &[usize], d: &impl Fn(usize, usize) -> f64) -> Vec<(usize, usize)> {
    let m = odd.len();
    if m == 0 {
        return Vec::new();
    }
    let full = (1usize << m) - 1;
    let mut best = vec![f64::INFINITY; full + 1];
    let mut choice = vec![(0usize, 0usize); full + 1];
    best[0] = 0.0;
    for mask in 1..=full {
        if (mask.count_ones() & 1) == 1 {
            continue;
        }
        let i = mask.trailing_zeros() as usize;
        for j in (i + 1)..m {
            if mask & (1 << j) == 0 {
                continue;
            }
            let rest = mask & !(1 << i) & !(1 << j);
            let cand = best[rest] + d(odd[i], odd[j]);
            if cand < best[mask] {
                best[mask] = cand;
                choice[mask] = (i, j);
            }
        }
    }
    let mut pairs = Vec::with_capacity(m / 2);
    let mut mask = full;
    while mask != 0 {
        let (i, j) = choice[mask];
        pairs.push((odd[i], odd[j]));
        mask &= !(1 << i) & !(1 << j);
    }
    pairs
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
    fn triangle_is_optimal() {
        let d = euclid(&[(0.0, 0.0), (3.0, 0.0), (0.0, 4.0)]);
        let m = MetricView::new(&d, 3);
        let r = christofides_tour(&m, &[0, 1, 2], 0).unwrap();
        assert_eq!(r.cost, 12.0);
        assert_eq!(r.order[0], 0);
        assert_eq!(r.order.len(), 3);
    }

    #[test]
    fn unit_square() {
        let d = euclid(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        let m = MetricView::new(&d, 4);
        let r = christofides_tour(&m, &[1, 2, 3], 0).unwrap();
        assert_eq!(r.cost, 4.0);
    }

    #[test]
    fn small_inputs() {
        let d = euclid(&[(0.0, 0.0), (1.0, 0.0)]);
        let m = MetricView::new(&d, 2);
        assert_eq!(christofides_tour(&m, &[], 0).unwrap().cost, 0.0);
        assert_eq!(christofides_tour(&m, &[1], 0).unwrap().cost, 2.0);
    }
}
