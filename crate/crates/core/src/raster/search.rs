// Grid shortest paths. Lengths are tracked as (straight steps, diagonal
// steps) so every search computes a given path's length the same way.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{ClassGrid, GridHeader, Pixel, RasterError};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub(crate) struct Steps {
    pub straight: u32,
    pub diagonal: u32,
}

impl Steps {
    pub fn add(self, diagonal: bool) -> Self {
        if diagonal {
            Steps { diagonal: self.diagonal + 1, ..self }
        } else {
            Steps { straight: self.straight + 1, ..self }
        }
    }

    /// Length in pixel units.
    pub fn key(self) -> f64 {
        self.straight as f64 + self.diagonal as f64 * std::f64::consts::SQRT_2
    }

    pub fn metres(self, res: f64) -> f64 {
        self.key() * res
    }
}

/// Octile distance in pixel units.
pub(crate) fn octile((r0, c0): Pixel, (r1, c1): Pixel) -> f64 {
    let dr = r0.abs_diff(r1);
    let dc = c0.abs_diff(c1);
    Steps { straight: dr.abs_diff(dc) as u32, diagonal: dr.min(dc) as u32 }.key()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Entry {
    pub priority: f64,
    pub steps: Steps,
    pub index: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on priority, then lowest index.
        other.priority.total_cmp(&self.priority).then_with(|| other.index.cmp(&self.index))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridPath {
    pub pixels: Vec<Pixel>,
    pub length_m: f64,
}

/// Shortest 8-connected path over deterministic water, guided by the octile
/// heuristic. `Ok(None)` when the endpoints are not connected.
pub fn astar_grid(grid: &ClassGrid, from: Pixel, to: Pixel) -> Result<Option<GridPath>, RasterError> {
    for p in [from, to] {
        if p.0 >= grid.header.height || p.1 >= grid.header.width || !grid.is_water(p) {
            return Err(RasterError::NotWater(p));
        }
    }
    Ok(astar_on(&grid.header, |p| grid.is_water(p), from, to))
}

pub(crate) fn astar_on(header: &GridHeader, passable: impl Fn(Pixel) -> bool, from: Pixel, to: Pixel) -> Option<GridPath> {
    let n = header.len();
    let mut best: Vec<Option<Steps>> = vec![None; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut heap = BinaryHeap::new();
    let start = header.index(from);
    let goal = header.index(to);
    best[start] = Some(Steps::default());
    heap.push(Entry { priority: octile(from, to), steps: Steps::default(), index: start });
    while let Some(Entry { steps, index, .. }) = heap.pop() {
        if closed[index] {
            continue;
        }
        closed[index] = true;
        if index == goal {
            let mut pixels = vec![header.pixel(goal)];
            let mut cur = goal;
            while cur != start {
                cur = parent[cur];
                pixels.push(header.pixel(cur));
            }
            pixels.reverse();
            return Some(GridPath { pixels, length_m: steps.metres(header.res) });
        }
        let p = header.pixel(index);
        for (q, diag) in header.neighbours(p) {
            let qi = header.index(q);
            if closed[qi] || !passable(q) {
                continue;
            }
            let next = steps.add(diag);
            if best[qi].is_none_or(|b| next.key() < b.key()) {
                best[qi] = Some(next);
                parent[qi] = index;
                heap.push(Entry { priority: next.key() + octile(q, to), steps: next, index: qi });
            }
        }
    }
    None
}

/// Bounded Dijkstra distance in metres; `None` when `to` is farther than
/// `limit_m` or unreachable.
pub(crate) fn bounded_distance(
    header: &GridHeader,
    passable: impl Fn(Pixel) -> bool,
    from: Pixel,
    to: Pixel,
    limit_m: f64,
) -> Option<f64> {
    use std::collections::HashMap;
    let limit = limit_m / header.res;
    let goal = header.index(to);
    let mut best: HashMap<usize, Steps> = HashMap::new();
    let mut heap = BinaryHeap::new();
    let start = header.index(from);
    best.insert(start, Steps::default());
    heap.push(Entry { priority: 0.0, steps: Steps::default(), index: start });
    while let Some(Entry { steps, index, .. }) = heap.pop() {
        if best.get(&index).is_some_and(|b| b.key() < steps.key()) {
            continue;
        }
        if index == goal {
            return Some(steps.metres(header.res));
        }
        for (q, diag) in header.neighbours(header.pixel(index)) {
            if !passable(q) {
                continue;
            }
            let qi = header.index(q);
            let next = steps.add(diag);
            if next.key() > limit + 1e-9 {
                continue;
            }
            if best.get(&qi).is_none_or(|b| next.key() < b.key()) {
                best.insert(qi, next);
                heap.push(Entry { priority: next.key(), steps: next, index: qi });
            }
        }
    }
    None
}
