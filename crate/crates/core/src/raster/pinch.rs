use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use super::dbscan::{dbscan, Label};
use super::search::{bounded_distance, Entry, Steps};
use super::{classify, ClassGrid, Pixel, PixelClass, ProbWaterMask};
use crate::exec::{self, Execution};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PinchConfig {
    pub tau_water: f64,
    pub tau_land: f64,
    /// A stochastic path is a shortcut when the water detour is at least
    /// `kappa` times longer.
    pub kappa: f64,
    /// Search radius along stochastic water, in pixels.
    pub r_px: f64,
    pub eps_px: f64,
    pub min_pts: usize,
    pub exec: Execution,
}

impl Default for PinchConfig {
    fn default() -> Self {
        PinchConfig {
            tau_water: 0.95,
            tau_land: 0.05,
            kappa: 3.0,
            r_px: 30.0,
            eps_px: 5.0,
            min_pts: 1,
            exec: Execution::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PinchCandidate {
    pub endpoints: [Pixel; 2],
    /// Stochastic pixels strictly between the endpoints.
    pub pixel_path: Vec<Pixel>,
    pub stoch_len_m: f64,
    /// Deterministic-water distance between the endpoints when it was found
    /// within the search bound; `None` means disconnected or farther.
    pub detour_len_m: Option<f64>,
    pub min_water_prob: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PinchEdge {
    pub candidate: PinchCandidate,
    pub block_prob: f64,
    pub cluster_size: usize,
}

/// Shortcuts through stochastic water between boundary pixels of
/// deterministic water, one per DBSCAN cluster of candidate midpoints.
pub fn detect_pinch_points(mask: &ProbWaterMask, config: &PinchConfig) -> Vec<PinchEdge> {
    let grid = classify(mask, config.tau_water, config.tau_land);
    detect_on(mask, &grid, config)
}

pub(crate) fn detect_on(mask: &ProbWaterMask, grid: &ClassGrid, config: &PinchConfig) -> Vec<PinchEdge> {
    let boundary = grid.boundary();
    let header = &grid.header;
    let mut is_boundary = vec![false; header.len()];
    for &b in &boundary {
        is_boundary[header.index(b)] = true;
    }
    let per_pixel = exec::map(config.exec, &boundary, |&b| candidates_from(mask, grid, &is_boundary, b, config));
    let candidates: Vec<PinchCandidate> = per_pixel.into_iter().flatten().collect();
    if candidates.is_empty() {
        return Vec::new();
    }

    let midpoints: Vec<(f64, f64)> = candidates
        .iter()
        .map(|c| {
            let a = header.center(c.endpoints[0]);
            let b = header.center(c.endpoints[1]);
            ((a.0 + b.0) / 2.0, (a.1 + b.1) / 2.0)
        })
        .collect();
    let labels = dbscan(&midpoints, config.eps_px * header.res, config.min_pts);
    let clusters = labels.iter().filter_map(|l| if let Label::Cluster(c) = l { Some(*c + 1) } else { None }).max();
    let mut best: Vec<Option<usize>> = vec![None; clusters.unwrap_or(0)];
    let mut sizes = vec![0usize; best.len()];
    for (i, l) in labels.iter().enumerate() {
        if let Label::Cluster(c) = *l {
            sizes[c] += 1;
            if best[c].is_none_or(|j| candidates[i].stoch_len_m < candidates[j].stoch_len_m) {
                best[c] = Some(i);
            }
        }
    }
    best.into_iter()
        .zip(sizes)
        .filter_map(|(b, size)| {
            let c = candidates[b?].clone();
            Some(PinchEdge { block_prob: 1.0 - c.min_water_prob, candidate: c, cluster_size: size })
        })
        .collect()
}

/// Dijkstra from one boundary pixel through stochastic water to boundary
/// pixels with a higher index, then the shortcut test on each.
fn candidates_from(
    mask: &ProbWaterMask,
    grid: &ClassGrid,
    is_boundary: &[bool],
    from: Pixel,
    config: &PinchConfig,
) -> Vec<PinchCandidate> {
    let header = &grid.header;
    let start = header.index(from);
    let mut best: HashMap<usize, Steps> = HashMap::new();
    let mut parent: HashMap<usize, usize> = HashMap::new();
    let mut reached: HashMap<usize, (Steps, usize)> = HashMap::new();
    let mut heap = BinaryHeap::new();
    best.insert(start, Steps::default());
    heap.push(Entry { priority: 0.0, steps: Steps::default(), index: start });
    while let Some(Entry { steps, index, .. }) = heap.pop() {
        if best.get(&index).is_some_and(|b| b.key() < steps.key()) {
            continue;
        }
        for (q, diag) in header.neighbours(header.pixel(index)) {
            let qi = header.index(q);
            let next = steps.add(diag);
            if next.key() > config.r_px + 1e-9 {
                continue;
            }
            match grid.classes[qi] {
                PixelClass::StochasticWater => {
                    if best.get(&qi).is_none_or(|b| next.key() < b.key()) {
                        best.insert(qi, next);
                        parent.insert(qi, index);
                        heap.push(Entry { priority: next.key(), steps: next, index: qi });
                    }
                }
                PixelClass::DeterministicWater
                    if index != start
                        && qi > start
                        && is_boundary[qi]
                        && reached.get(&qi).is_none_or(|(b, _)| next.key() < b.key()) =>
                {
                    reached.insert(qi, (next, index));
                }
                _ => {}
            }
        }
    }

    let mut ends: Vec<usize> = reached.keys().copied().collect();
    ends.sort_unstable();
    let mut out = Vec::new();
    for end in ends {
        let (steps, last) = reached[&end];
        let stoch_len = steps.metres(header.res);
        let mut path = vec![header.pixel(last)];
        let mut cur = last;
        while let Some(&p) = parent.get(&cur) {
            if p == start {
                break;
            }
            path.push(header.pixel(p));
            cur = p;
        }
        path.reverse();
        let to = header.pixel(end);
        let detour = bounded_distance(header, |p| grid.is_water(p), from, to, config.kappa * stoch_len);
        if detour.is_some_and(|d| d < config.kappa * stoch_len) {
            continue;
        }
        let min_water_prob = path.iter().map(|&p| mask.get(p)).fold(f64::INFINITY, f64::min);
        out.push(PinchCandidate {
            endpoints: [from, to],
            pixel_path: path,
            stoch_len_m: stoch_len,
            detour_len_m: detour,
            min_water_prob,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::GridHeader;

    /// Two 20x20 water blobs side by side, joined by a 3-row channel.
    fn two_blobs(channel: impl Fn(usize) -> f64) -> ProbWaterMask {
        let (w, h) = (50, 24);
        let header = GridHeader::new(w, h, 0.0, 240.0, 10.0).unwrap();
        let mut probs = vec![0.0; w * h];
        for r in 2..22 {
            for c in 2..22 {
                probs[r * w + c] = 1.0;
                probs[r * w + c + 26] = 1.0;
            }
        }
        for r in 11..14 {
            for c in 22..28 {
                probs[r * w + c] = channel(c);
            }
        }
        ProbWaterMask::new(header, probs).unwrap()
    }

    #[test]
    fn channel_between_blobs_is_one_edge() {
        let mask = two_blobs(|c| if c == 25 { 0.4 } else { 0.7 });
        let edges = detect_pinch_points(&mask, &PinchConfig::default());
        assert_eq!(edges.len(), 1);
        assert!((edges[0].block_prob - 0.6).abs() < 1e-12);
        let [a, b] = edges[0].candidate.endpoints;
        assert!(a.1 < 22 && b.1 >= 28);
        assert_eq!(edges[0].candidate.stoch_len_m, 70.0);
    }

    #[test]
    fn lake_without_stochastic_pixels_has_none() {
        let header = GridHeader::new(10, 10, 0.0, 0.0, 10.0).unwrap();
        let mask = ProbWaterMask::new(header, vec![1.0; 100]).unwrap();
        assert!(detect_pinch_points(&mask, &PinchConfig::default()).is_empty());
    }

    #[test]
    fn sequential_matches_parallel() {
        let mask = two_blobs(|c| 0.3 + 0.01 * c as f64);
        let seq = detect_pinch_points(&mask, &PinchConfig { exec: Execution::Sequential, ..Default::default() });
        let par = detect_pinch_points(&mask, &PinchConfig { exec: Execution::Parallel, ..Default::default() });
        assert_eq!(seq, par);
    }
}
