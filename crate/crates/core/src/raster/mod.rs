//! From spectral rasters to a stochastic graph.
//!
//! Grids are row-major, north to south. `(x0, y0)` is the north-west corner
//! of the raster; the centre of pixel `(row, col)` sits at
//! `x0 + (col + 0.5) * res`, `y0 - (row + 0.5) * res`.

mod build;
mod classify;
mod dbscan;
mod io;
mod pinch;
mod search;
mod water;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::GraphError;

pub use build::{build_graph, smooth_path, BuildConfig, BuildReport, BuiltGraph};
pub use classify::{classify, classify_and_boundary, classify_windy, shore_distance, ClassGrid, PixelClass};
pub use dbscan::{dbscan, Label};
pub use io::{parse_raster, RasterKind};
pub use pinch::{detect_pinch_points, PinchCandidate, PinchConfig, PinchEdge};
pub use search::{astar_grid, GridPath};
pub use water::{aggregate_masks, classify_water, fit_bimodal_threshold, ndwi, GaussianComponent, GmmFit};

/// `(row, col)`.
pub type Pixel = (usize, usize);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RasterError {
    #[error("grid headers differ")]
    HeaderMismatch,
    #[error("invalid grid: {0}")]
    BadGrid(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("need at least {need} valid pixels, found {found}")]
    TooFewPixels { need: usize, found: usize },
    #[error("all valid values are identical; the histogram is degenerate")]
    DegenerateHistogram,
    #[error("no masks to aggregate")]
    EmptyInput,
    #[error("pixel {0:?} is not deterministic water")]
    NotWater(Pixel),
    #[error("points {points:?} have no deterministic water pixel within {radius_px} pixels")]
    SnapFailed { points: Vec<(f64, f64)>, radius_px: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridHeader {
    pub width: usize,
    pub height: usize,
    pub x0: f64,
    pub y0: f64,
    pub res: f64,
}

impl GridHeader {
    pub fn new(width: usize, height: usize, x0: f64, y0: f64, res: f64) -> Result<Self, RasterError> {
        let h = GridHeader { width, height, x0, y0, res };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<(), RasterError> {
        if self.width == 0 || self.height == 0 {
            return Err(RasterError::BadGrid("empty grid".into()));
        }
        if !(self.res > 0.0 && self.res.is_finite()) {
            return Err(RasterError::BadGrid(format!("resolution {} must be positive", self.res)));
        }
        if !self.x0.is_finite() || !self.y0.is_finite() {
            return Err(RasterError::BadGrid("origin must be finite".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, (r, c): Pixel) -> usize {
        r * self.width + c
    }

    #[inline]
    pub fn pixel(&self, i: usize) -> Pixel {
        (i / self.width, i % self.width)
    }

    pub fn center(&self, (r, c): Pixel) -> (f64, f64) {
        (self.x0 + (c as f64 + 0.5) * self.res, self.y0 - (r as f64 + 0.5) * self.res)
    }

    /// Pixel containing a point, if inside the grid.
    pub fn locate(&self, x: f64, y: f64) -> Option<Pixel> {
        let c = ((x - self.x0) / self.res).floor();
        let r = ((self.y0 - y) / self.res).floor();
        (c >= 0.0 && r >= 0.0 && (c as usize) < self.width && (r as usize) < self.height)
            .then_some((r as usize, c as usize))
    }

    /// In-grid 8-neighbours with a flag for diagonal steps.
    pub fn neighbours(&self, (r, c): Pixel) -> impl Iterator<Item = (Pixel, bool)> + '_ {
        const STEPS: [(isize, isize); 8] = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)];
        STEPS.iter().filter_map(move |&(dr, dc)| {
            let nr = r as isize + dr;
            let nc = c as isize + dc;
            (nr >= 0 && nc >= 0 && (nr as usize) < self.height && (nc as usize) < self.width)
                .then_some(((nr as usize, nc as usize), dr != 0 && dc != 0))
        })
    }
}

/// A single-band raster: reflectance, an index, or a 0/1 mask.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandRaster {
    pub header: GridHeader,
    pub values: Vec<f64>,
    pub valid: Option<Vec<bool>>,
}

impl BandRaster {
    pub fn new(header: GridHeader, values: Vec<f64>, valid: Option<Vec<bool>>) -> Result<Self, RasterError> {
        header.validate()?;
        if values.len() != header.len() {
            return Err(RasterError::BadGrid(format!("{} values for a {}x{} grid", values.len(), header.width, header.height)));
        }
        if valid.as_ref().is_some_and(|v| v.len() != header.len()) {
            return Err(RasterError::BadGrid("validity grid has the wrong size".into()));
        }
        Ok(BandRaster { header, values, valid })
    }

    pub fn is_valid(&self, i: usize) -> bool {
        self.valid.as_ref().is_none_or(|v| v[i])
    }

    pub fn get(&self, p: Pixel) -> f64 {
        self.values[self.header.index(p)]
    }
}

/// Per-pixel probability of water.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbWaterMask {
    pub header: GridHeader,
    pub probs: Vec<f64>,
    /// Pixels never observed get probability 0 and `false` here.
    pub valid: Option<Vec<bool>>,
}

impl ProbWaterMask {
    pub fn new(header: GridHeader, probs: Vec<f64>) -> Result<Self, RasterError> {
        header.validate()?;
        if probs.len() != header.len() {
            return Err(RasterError::BadGrid(format!("{} values for a {}x{} grid", probs.len(), header.width, header.height)));
        }
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(RasterError::BadGrid(format!("probability {p} outside [0, 1]")));
        }
        Ok(ProbWaterMask { header, probs, valid: None })
    }

    pub fn get(&self, p: Pixel) -> f64 {
        self.probs[self.header.index(p)]
    }
}
