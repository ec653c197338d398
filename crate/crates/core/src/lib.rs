//! Route planning for the partial covering Canadian traveller problem.
//!
//! A robot starts at a home node, must visit every target it can reach on a
//! graph whose stochastic edges may turn out to be blocked, and returns home.
//! The crate covers the whole offline pipeline:
//!
//! * [`raster`] turns stacks of spectral rasters into probabilistic water
//!   masks and extracts a [`graph::StochasticGraph`] from them.
//! * [`solver`] computes the optimal adaptive policy with AO* search.
//! * [`baselines`] holds the greedy, optimistic-TSP and cyclic-routing actors.
//! * [`evaluator`] enumerates possible worlds and reports expected regret.
//! * [`tsp`] carries the exact subset DP kernels and Christofides.

pub mod baselines;
pub mod evaluator;
pub mod exec;
pub mod generator;
pub mod graph;
pub mod raster;
pub mod solver;
pub mod tsp;

pub use exec::Execution;
pub use graph::{EdgeStatus, InfoVector, NodeId, RobotState, StochasticGraph, World};
pub use solver::{solve, Policy, SolverConfig};
