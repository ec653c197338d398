use serde::{Deserialize, Serialize};

use super::{BandRaster, ProbWaterMask, RasterError};

const MIN_PIXELS: usize = 100;
const MAX_ITERS: usize = 200;
const TOL: f64 = 1e-6;

/// Per-pixel `(green - nir) / (green + nir)`. A pixel is invalid when either
/// band is invalid there or the denominator is zero.
pub fn ndwi(green: &BandRaster, nir: &BandRaster) -> Result<BandRaster, RasterError> {
    if green.header != nir.header {
        return Err(RasterError::HeaderMismatch);
    }
    let n = green.header.len();
    let mut values = vec![0.0; n];
    let mut valid = vec![true; n];
    for i in 0..n {
        let (g, r) = (green.values[i], nir.values[i]);
        let sum = g + r;
        if !green.is_valid(i) || !nir.is_valid(i) || sum == 0.0 || !sum.is_finite() {
            valid[i] = false;
        } else {
            values[i] = (g - r) / sum;
        }
    }
    BandRaster::new(green.header, values, Some(valid))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    pub mean: f64,
    pub variance: f64,
    pub weight: f64,
}

impl GaussianComponent {
    fn log_density(&self, x: f64) -> f64 {
        let d = x - self.mean;
        self.weight.ln() - 0.5 * (2.0 * std::f64::consts::PI * self.variance).ln() - d * d / (2.0 * self.variance)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GmmFit {
    /// Values strictly above the threshold are water.
    pub threshold: f64,
    /// Sorted by mean; the second component is water.
    pub components: [GaussianComponent; 2],
    pub iterations: usize,
    pub converged: bool,
    /// Mean log-likelihood per sample at the final parameters.
    pub log_likelihood: f64,
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Two-component 1-D Gaussian mixture fitted by EM on the valid values; the
/// threshold is where both posteriors are equal, between the two means.
pub fn fit_bimodal_threshold(raster: &BandRaster) -> Result<GmmFit, RasterError> {
    let xs: Vec<f64> = (0..raster.header.len())
        .filter(|&i| raster.is_valid(i) && raster.values[i].is_finite())
        .map(|i| raster.values[i])
        .collect();
    if xs.len() < MIN_PIXELS {
        return Err(RasterError::TooFewPixels { need: MIN_PIXELS, found: xs.len() });
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let spread = xs.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) - xs.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if var <= 0.0 || spread <= 1e-12 * (1.0 + mean.abs()) {
        return Err(RasterError::DegenerateHistogram);
    }
    let floor = var * 1e-6;

    let mut sorted = xs.clone();
    sorted.sort_by(f64::total_cmp);
    let (mut m0, mut m1) = (quantile(&sorted, 0.25), quantile(&sorted, 0.75));
    if m0 == m1 {
        m0 = sorted[0];
        m1 = sorted[sorted.len() - 1];
    }
    let mut comps = [
        GaussianComponent { mean: m0, variance: var, weight: 0.5 },
        GaussianComponent { mean: m1, variance: var, weight: 0.5 },
    ];

    let mut resp = vec![0.0; xs.len()];
    let mut prev_ll = f64::NEG_INFINITY;
    let mut ll = f64::NEG_INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITERS {
        iterations += 1;
        // E-step: responsibility of component 1.
        let mut total = 0.0;
        for (x, r) in xs.iter().zip(resp.iter_mut()) {
            let a = comps[0].log_density(*x);
            let b = comps[1].log_density(*x);
            let lse = log_sum_exp(a, b);
            total += lse;
            *r = (b - lse).exp();
        }
        ll = total / n;
        if (ll - prev_ll).abs() < TOL {
            converged = true;
            break;
        }
        prev_ll = ll;
        // M-step.
        let w1: f64 = resp.iter().sum();
        let w0 = n - w1;
        if w0 <= 0.0 || w1 <= 0.0 {
            break;
        }
        let mu0 = xs.iter().zip(&resp).map(|(x, r)| (1.0 - r) * x).sum::<f64>() / w0;
        let mu1 = xs.iter().zip(&resp).map(|(x, r)| r * x).sum::<f64>() / w1;
        let v0 = xs.iter().zip(&resp).map(|(x, r)| (1.0 - r) * (x - mu0) * (x - mu0)).sum::<f64>() / w0;
        let v1 = xs.iter().zip(&resp).map(|(x, r)| r * (x - mu1) * (x - mu1)).sum::<f64>() / w1;
        comps = [
            GaussianComponent { mean: mu0, variance: v0.max(floor), weight: w0 / n },
            GaussianComponent { mean: mu1, variance: v1.max(floor), weight: w1 / n },
        ];
    }
    if comps[0].mean > comps[1].mean {
        comps.swap(0, 1);
    }
    let threshold = equal_posterior(&comps);
    Ok(GmmFit { threshold, components: comps, iterations, converged, log_likelihood: ll })
}

/// Root of `log p1(x) - log p0(x)` between the means, by bisection. Falls back
/// to the midpoint when one component dominates the whole interval.
fn equal_posterior(c: &[GaussianComponent; 2]) -> f64 {
    let diff = |x: f64| c[1].log_density(x) - c[0].log_density(x);
    let (mut lo, mut hi) = (c[0].mean, c[1].mean);
    let (dlo, dhi) = (diff(lo), diff(hi));
    if !(dlo <= 0.0 && dhi >= 0.0) || lo == hi {
        return 0.5 * (lo + hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if diff(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// 0/1 water mask: valid values above `threshold` are water.
pub fn classify_water(ndwi: &BandRaster, threshold: f64) -> BandRaster {
    let values = ndwi
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| if ndwi.is_valid(i) && v > threshold { 1.0 } else { 0.0 })
        .collect();
    BandRaster { header: ndwi.header, values, valid: ndwi.valid.clone() }
}

/// Per-pixel mean of binary masks over the images where the pixel is valid.
pub fn aggregate_masks(masks: &[BandRaster]) -> Result<ProbWaterMask, RasterError> {
    let first = masks.first().ok_or(RasterError::EmptyInput)?;
    if masks.iter().any(|m| m.header != first.header) {
        return Err(RasterError::HeaderMismatch);
    }
    let n = first.header.len();
    let mut probs = vec![0.0; n];
    let mut valid = vec![true; n];
    for i in 0..n {
        let mut water = 0usize;
        let mut seen = 0usize;
        for m in masks {
            if m.is_valid(i) {
                seen += 1;
                if m.values[i] > 0.5 {
                    water += 1;
                }
            }
        }
        if seen == 0 {
            valid[i] = false;
        } else {
            probs[i] = water as f64 / seen as f64;
        }
    }
    let mut mask = ProbWaterMask::new(first.header, probs)?;
    if valid.iter().any(|v| !v) {
        mask.valid = Some(valid);
    }
    Ok(mask)
}
