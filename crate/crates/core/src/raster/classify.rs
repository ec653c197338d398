use serde::{Deserialize, Serialize};

use super::{GridHeader, Pixel, ProbWaterMask};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PixelClass {
    DeterministicWater,
    StochasticWater,
    Land,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassGrid {
    pub header: GridHeader,
    pub classes: Vec<PixelClass>,
}

impl ClassGrid {
    pub fn get(&self, p: Pixel) -> PixelClass {
        self.classes[self.header.index(p)]
    }

    pub fn is_water(&self, p: Pixel) -> bool {
        self.get(p) == PixelClass::DeterministicWater
    }

    /// Deterministic water pixels with a non-deterministic-water 8-neighbour.
    /// Pixels on the grid edge count as bordering the outside.
    pub fn boundary(&self) -> Vec<Pixel> {
        let h = &self.header;
        (0..h.len())
            .map(|i| h.pixel(i))
            .filter(|&p| {
                self.is_water(p)
                    && (h.neighbours(p).count() < 8 || h.neighbours(p).any(|(q, _)| !self.is_water(q)))
            })
            .collect()
    }
}

/// Deterministic water when `prob >= tau_water`, land when `prob <= tau_land`.
pub fn classify(mask: &ProbWaterMask, tau_water: f64, tau_land: f64) -> ClassGrid {
    let classes = mask
        .probs
        .iter()
        .map(|&p| {
            if p >= tau_water {
                PixelClass::DeterministicWater
            } else if p <= tau_land {
                PixelClass::Land
            } else {
                PixelClass::StochasticWater
            }
        })
        .collect();
    ClassGrid { header: mask.header, classes }
}

pub fn classify_and_boundary(mask: &ProbWaterMask, tau_water: f64, tau_land: f64) -> (ClassGrid, Vec<Pixel>) {
    let grid = classify(mask, tau_water, tau_land);
    let boundary = grid.boundary();
    (grid, boundary)
}

/// Exact squared Euclidean distance transform of a sampled function, one
/// dimension (Felzenszwalb and Huttenlocher).
fn edt_1d(f: &[f64], out: &mut [f64]) {
    let n = f.len();
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0usize;
    let Some(q0) = f.iter().position(|x| x.is_finite()) else {
        out.iter_mut().for_each(|o| *o = f64::INFINITY);
        return;
    };
    v[0] = q0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in (q0 + 1)..n {
        if !f[q].is_finite() {
            continue;
        }
        loop {
            let p = v[k];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] && k > 0 {
                k -= 1;
            } else if s <= z[k] {
                // k == 0 and z[0] is -inf, cannot happen.
                unreachable!()
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
                break;
            }
        }
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

/// Distance in metres from each pixel centre to the nearest centre of a
/// pixel that is not deterministic water. The grid is surrounded by a ring of
/// non-water, so edge pixels are at most one pixel from shore.
pub fn shore_distance(grid: &ClassGrid) -> Vec<f64> {
    let (w, h) = (grid.header.width, grid.header.height);
    let (pw, ph) = (w + 2, h + 2);
    let mut f = vec![0.0; pw * ph];
    for r in 0..h {
        for c in 0..w {
            if grid.is_water((r, c)) {
                f[(r + 1) * pw + c + 1] = f64::INFINITY;
            }
        }
    }
    let mut col_in = vec![0.0; ph];
    let mut col_out = vec![0.0; ph];
    for c in 0..pw {
        for r in 0..ph {
            col_in[r] = f[r * pw + c];
        }
        edt_1d(&col_in, &mut col_out);
        for r in 0..ph {
            f[r * pw + c] = col_out[r];
        }
    }
    let mut row_out = vec![0.0; pw];
    for r in 0..ph {
        edt_1d(&f[r * pw..(r + 1) * pw], &mut row_out);
        f[r * pw..(r + 1) * pw].copy_from_slice(&row_out);
    }
    let res = grid.header.res;
    let mut out = Vec::with_capacity(w * h);
    for r in 0..h {
        for c in 0..w {
            out.push(f[(r + 1) * pw + c + 1].sqrt() * res);
        }
    }
    out
}

/// True when some waypoint lies strictly farther than `threshold_m` from shore.
pub fn classify_windy(polyline: &[(f64, f64)], grid: &ClassGrid, threshold_m: f64) -> bool {
    windy_with(polyline, &grid.header, &shore_distance(grid), threshold_m)
}

pub(crate) fn windy_with(polyline: &[(f64, f64)], header: &GridHeader, dist: &[f64], threshold_m: f64) -> bool {
    polyline
        .iter()
        .filter_map(|&(x, y)| header.locate(x, y))
        .any(|p| dist[header.index(p)] > threshold_m)
}
