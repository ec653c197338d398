use serde::{Deserialize, Serialize};

use super::classify::{shore_distance, windy_with};
use super::pinch::{detect_on, PinchConfig, PinchEdge};
use super::search::astar_on;
use super::{classify, ClassGrid, GridHeader, Pixel, ProbWaterMask, RasterError};
use crate::exec::{self, Execution};
use crate::graph::{DetEdge, Node, NodeId, StochEdge, StochasticGraph, DEFAULT_K_MAX};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildConfig {
    pub pinch: PinchConfig,
    pub p_wind: f64,
    pub shore_dist_threshold_m: f64,
    pub snap_radius_px: usize,
    pub smooth_stride: usize,
    pub prune_tol_m: f64,
    pub k_max: usize,
    pub exec: Execution,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            pinch: PinchConfig::default(),
            p_wind: 0.05,
            shore_dist_threshold_m: 200.0,
            snap_radius_px: 5,
            smooth_stride: 5,
            prune_tol_m: 1.0,
            k_max: DEFAULT_K_MAX,
            exec: Execution::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildReport {
    pub pinch_edges_found: usize,
    pub pinch_edges_pruned: usize,
    pub windy_edges: usize,
    pub redundant_det_edges: usize,
}

#[derive(Clone, Debug)]
pub struct BuiltGraph {
    pub graph: StochasticGraph,
    pub report: BuildReport,
    pub pinch: Vec<PinchEdge>,
}

/// Keeps the first and last waypoints and every `stride`-th one between.
pub fn smooth_path(path: &[Pixel], stride: usize) -> Vec<Pixel> {
    let stride = stride.max(1);
    let last = path.len().saturating_sub(1);
    path.iter()
        .enumerate()
        .filter(|&(i, _)| i % stride == 0 || i == last)
        .map(|(_, &p)| p)
        .collect()
}

fn snap(grid: &ClassGrid, x: f64, y: f64, radius: usize) -> Option<Pixel> {
    let h = &grid.header;
    // Pixel under the point, possibly off-grid.
    let c = ((x - h.x0) / h.res).floor();
    let r = ((h.y0 - y) / h.res).floor();
    if !c.is_finite() || !r.is_finite() {
        return None;
    }
    let (r, c) = (r as i64, c as i64);
    let rad = radius as i64;
    let mut best: Option<(i64, Pixel)> = None;
    for rr in (r - rad)..=(r + rad) {
        for cc in (c - rad)..=(c + rad) {
            if rr < 0 || cc < 0 || rr >= h.height as i64 || cc >= h.width as i64 {
                continue;
            }
            let d2 = (rr - r).pow(2) + (cc - c).pow(2);
            let p = (rr as usize, cc as usize);
            if d2 <= rad * rad && grid.is_water(p) && best.is_none_or(|(b, _)| d2 < b) {
                best = Some((d2, p));
            }
        }
    }
    best.map(|(_, p)| p)
}

fn polyline(h: &GridHeader, pixels: &[Pixel]) -> Vec<[f64; 2]> {
    pixels.iter().map(|&p| {
        let (x, y) = h.center(p);
        [x, y]
    }).collect()
}

fn floyd(n: usize, edges: &[(NodeId, NodeId, f64)]) -> Vec<f64> {
    let mut d = vec![f64::INFINITY; n * n];
    for i in 0..n {
        d[i * n + i] = 0.0;
    }
    for &(u, v, c) in edges {
        if c < d[u * n + v] {
            d[u * n + v] = c;
            d[v * n + u] = c;
        }
    }
    for k in 0..n {
        for i in 0..n {
            let dik = d[i * n + k];
            if dik == f64::INFINITY {
                continue;
            }
            for j in 0..n {
                let cand = dik + d[k * n + j];
                if cand < d[i * n + j] {
                    d[i * n + j] = cand;
                }
            }
        }
    }
    d
}

/// Extracts the routing graph from a water mask. Points are in the raster's
/// metric frame. Node 0 is the start, nodes `1..=targets.len()` the targets
/// in input order, then endpoints of surviving pinch edges.
pub fn build_graph(
    mask: &ProbWaterMask,
    start: (f64, f64),
    targets: &[(f64, f64)],
    config: &BuildConfig,
) -> Result<BuiltGraph, RasterError> {
    let grid = classify(mask, config.pinch.tau_water, config.pinch.tau_land);
    let h = grid.header;

    let mut pixels: Vec<Pixel> = Vec::with_capacity(1 + targets.len());
    let mut failed = Vec::new();
    for &(x, y) in std::iter::once(&start).chain(targets) {
        match snap(&grid, x, y, config.snap_radius_px) {
            Some(p) => pixels.push(p),
            None => failed.push((x, y)),
        }
    }
    if !failed.is_empty() {
        return Err(RasterError::SnapFailed { points: failed, radius_px: config.snap_radius_px });
    }
    let mission = pixels.len();

    let pinch = detect_on(mask, &grid, &PinchConfig { exec: config.exec, ..config.pinch });
    let node_of = |p: Pixel, pixels: &mut Vec<Pixel>| -> NodeId {
        match pixels.iter().position(|&q| q == p) {
            Some(i) => i,
            None => {
                pixels.push(p);
                pixels.len() - 1
            }
        }
    };
    let mut stoch: Vec<(NodeId, NodeId, f64, f64, Vec<Pixel>)> = Vec::new();
    for e in &pinch {
        let [a, b] = e.candidate.endpoints;
        let u = node_of(a, &mut pixels);
        let v = node_of(b, &mut pixels);
        let mut path = vec![a];
        path.extend(&e.candidate.pixel_path);
        path.push(b);
        stoch.push((u, v, e.candidate.stoch_len_m, e.block_prob, path));
    }

    let det = astar_all(&h, &grid, &pixels, config);

    // Drop pinch edges that do not shorten any route between mission nodes.
    let n = pixels.len();
    let det_triples: Vec<(NodeId, NodeId, f64)> = det.iter().map(|(u, v, c, _)| (*u, *v, *c)).collect();
    let all: Vec<(NodeId, NodeId, f64)> =
        det_triples.iter().copied().chain(stoch.iter().map(|(u, v, c, _, _)| (*u, *v, *c))).collect();
    let full = floyd(n, &all);
    let mut keep = vec![true; stoch.len()];
    for i in 0..stoch.len() {
        keep[i] = false;
        let trial: Vec<_> = det_triples
            .iter()
            .copied()
            .chain(stoch.iter().zip(&keep).filter(|(_, k)| **k).map(|((u, v, c, _, _), _)| (*u, *v, *c)))
            .collect();
        let d = floyd(n, &trial);
        let needed = (0..mission).any(|a| {
            (0..mission).any(|b| {
                let (with, without) = (full[a * n + b], d[a * n + b]);
                without.is_infinite() && with.is_finite() || without - with > config.prune_tol_m
            })
        });
        keep[i] = needed;
    }
    let pruned = keep.iter().filter(|k| !**k).count();

    // Renumber: mission nodes, then endpoints of surviving pinch edges.
    let mut used = vec![false; n];
    used[..mission].iter_mut().for_each(|u| *u = true);
    for (s, k) in stoch.iter().zip(&keep) {
        if *k {
            used[s.0] = true;
            used[s.1] = true;
        }
    }
    let mut new_id = vec![usize::MAX; n];
    let mut nodes = Vec::new();
    for i in 0..n {
        if used[i] {
            new_id[i] = nodes.len();
            let (x, y) = h.center(pixels[i]);
            nodes.push(Node::at(nodes.len(), x, y));
        }
    }

    let kept_det: Vec<_> = det.into_iter().filter(|e| used[e.0] && used[e.1]).collect();
    let (det, redundant) = drop_redundant(n, kept_det);

    let dist = shore_distance(&grid);
    let mut det_out = Vec::new();
    let mut stoch_out = Vec::new();
    let mut windy = 0;
    for (u, v, c, path) in det {
        let line = polyline(&h, &path);
        let pts: Vec<(f64, f64)> = line.iter().map(|p| (p[0], p[1])).collect();
        if windy_with(&pts, &h, &dist, config.shore_dist_threshold_m) {
            windy += 1;
            let mut e = StochEdge::new(new_id[u], new_id[v], c, config.p_wind).wind();
            e.path = Some(line);
            stoch_out.push(e);
        } else {
            let mut e = DetEdge::new(new_id[u], new_id[v], c);
            e.path = Some(line);
            det_out.push(e);
        }
    }
    for ((u, v, c, p, path), k) in stoch.into_iter().zip(&keep) {
        if *k {
            let mut e = StochEdge::new(new_id[u], new_id[v], c, p);
            e.path = Some(polyline(&h, &path));
            stoch_out.push(e);
        }
    }
    let targets: Vec<NodeId> = (1..mission).collect();
    let graph = StochasticGraph::new(nodes, det_out, stoch_out, 0, targets, config.k_max)?;
    Ok(BuiltGraph {
        graph,
        report: BuildReport {
            pinch_edges_found: pinch.len(),
            pinch_edges_pruned: pruned,
            windy_edges: windy,
            redundant_det_edges: redundant,
        },
        pinch,
    })
}

type GridEdge = (NodeId, NodeId, f64, Vec<Pixel>);

/// A* between every node pair over deterministic water, smoothed.
fn astar_all(h: &GridHeader, grid: &ClassGrid, pixels: &[Pixel], config: &BuildConfig) -> Vec<GridEdge> {
    let n = pixels.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    let paths = exec::map(config.exec, &pairs, |&(i, j)| astar_on(h, |p| grid.is_water(p), pixels[i], pixels[j]));
    pairs
        .iter()
        .zip(paths)
        .filter_map(|(&(i, j), p)| p.map(|p| (i, j, p.length_m, smooth_path(&p.pixels, config.smooth_stride))))
        .collect()
}

/// Drops an edge when the remaining edges already connect its endpoints at
/// no extra cost, so the metric is unchanged. Longest edges go first.
fn drop_redundant(n: usize, mut edges: Vec<GridEdge>) -> (Vec<GridEdge>, usize) {
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.sort_by(|&a, &b| edges[b].2.total_cmp(&edges[a].2).then(a.cmp(&b)));
    let mut alive = vec![true; edges.len()];
    for &e in &order {
        alive[e] = false;
        let rest: Vec<_> = edges.iter().zip(&alive).filter(|(_, a)| **a).map(|(x, _)| (x.0, x.1, x.2)).collect();
        let d = floyd(n, &rest);
        let (u, v, c, _) = &edges[e];
        alive[e] = d[u * n + v] > *c * (1.0 + 1e-12);
    }
    let removed = alive.iter().filter(|a| !**a).count();
    let mut i = 0;
    edges.retain(|_| {
        i += 1;
        alive[i - 1]
    });
    (edges, removed)
}
