//! Exact subset dynamic programs for tours and paths, the set-TSP used by the
//! solver heuristic, and Christofides' approximation.

mod christofides;
mod held_karp;
mod set_tsp;

use thiserror::Error;

pub use christofides::{christofides_tour, MAX_ODD_NODES};
pub use held_karp::{held_karp_path, held_karp_tour, SubsetPaths, MAX_TOUR_NODES};
pub use set_tsp::{set_tsp_heuristic_cost, set_tsp_path_cost, MAX_SET_TSP_ITEMS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TspError {
    #[error("{n} nodes exceed the dynamic-programming cap of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("node {to} is unreachable from node {from}")]
    Unreachable { from: usize, to: usize },
    #[error("group {0} is empty")]
    EmptyGroup(usize),
    #[error("no finite walk satisfies every group")]
    Infeasible,
    #[error("{n} odd-degree nodes exceed the exact matching cap of {cap}")]
    TooManyOddNodes { n: usize, cap: usize },
}

/// Borrowed square distance matrix in row-major order. Entries are
/// non-negative or `+inf`.
#[derive(Clone, Copy, Debug)]
pub struct MetricView<'a> {
    dist: &'a [f64],
    n: usize,
}

impl<'a> MetricView<'a> {
    pub fn new(dist: &'a [f64], n: usize) -> Self {
        assert_eq!(dist.len(), n * n, "distance matrix must be n x n");
        MetricView { dist, n }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}

/// A closed tour or open path: `order` starts at the origin. Tours do not
/// repeat the origin at the end.
#[derive(Clone, Debug, PartialEq)]
pub struct Route {
    pub cost: f64,
    pub order: Vec<usize>,
}

pub(crate) fn ensure_finite(m: &MetricView<'_>, nodes: &[usize]) -> Result<(), TspError> {
    for &a in nodes {
        for &b in nodes {
            if !m.get(a, b).is_finite() {
                return Err(TspError::Unreachable { from: a, to: b });
            }
        }
    }
    Ok(())
}
