//! Run configuration and provenance stamps.

use std::path::Path;
use std::time::Duration;

use pcctp_core::evaluator::BenchConfig;
use pcctp_core::exec::Execution;
use pcctp_core::generator::GeneratorConfig;
use pcctp_core::graph::DEFAULT_K_MAX;
use pcctp_core::raster::{BuildConfig, PinchConfig};
use pcctp_core::solver::{CostModel, SolverConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Every tunable of a run. Read from a flat TOML file; absent keys take the
/// defaults below.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub tau_water: f64,
    pub tau_land: f64,
    pub kappa: f64,
    pub r_px: f64,
    pub dbscan_eps_px: f64,
    pub dbscan_min_pts: usize,
    pub p_wind: f64,
    pub shore_dist_threshold_m: f64,
    pub snap_radius_px: usize,
    pub smooth_stride: usize,
    pub prune_tol_m: f64,
    pub k_max: usize,
    pub max_expansions: usize,
    /// Wall-clock budget for one solve; 0 means none.
    pub time_limit_s: f64,
    pub failed_probe_fraction: f64,
    pub seed: u64,
    pub gen_nodes_min: usize,
    pub gen_nodes_max: usize,
    pub gen_targets_min: usize,
    pub gen_targets_max: usize,
    pub gen_pinch_min: usize,
    pub gen_pinch_max: usize,
    pub gen_windy_min: usize,
    pub gen_windy_max: usize,
    pub gen_block_prob_min: f64,
    pub gen_block_prob_max: f64,
    pub gen_extent_m: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let build = BuildConfig::default();
        let pinch = PinchConfig::default();
        let solver = SolverConfig::default();
        let gen = GeneratorConfig::default();
        RunConfig {
            tau_water: pinch.tau_water,
            tau_land: pinch.tau_land,
            kappa: pinch.kappa,
            r_px: pinch.r_px,
            dbscan_eps_px: pinch.eps_px,
            dbscan_min_pts: pinch.min_pts,
            p_wind: build.p_wind,
            shore_dist_threshold_m: build.shore_dist_threshold_m,
            snap_radius_px: build.snap_radius_px,
            smooth_stride: build.smooth_stride,
            prune_tol_m: build.prune_tol_m,
            k_max: DEFAULT_K_MAX,
            max_expansions: solver.max_expansions,
            time_limit_s: 0.0,
            failed_probe_fraction: solver.cost.failed_probe_fraction,
            seed: 0,
            gen_nodes_min: gen.nodes.0,
            gen_nodes_max: gen.nodes.1,
            gen_targets_min: gen.targets.0,
            gen_targets_max: gen.targets.1,
            gen_pinch_min: gen.pinch_edges.0,
            gen_pinch_max: gen.pinch_edges.1,
            gen_windy_min: gen.windy_edges.0,
            gen_windy_max: gen.windy_edges.1,
            gen_block_prob_min: gen.block_prob.0,
            gen_block_prob_max: gen.block_prob.1,
            gen_extent_m: gen.extent_m,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("bad config {}: {e}", path.display()))
    }

    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn meta(&self) -> serde_json::Value {
        serde_json::json!({
            "tool": "pcctp",
            "version": env!("CARGO_PKG_VERSION"),
            "config_hash": self.hash(),
            "config": self,
        })
    }

    /// Leading comment line for text outputs.
    pub fn stamp(&self) -> String {
        format!("# pcctp {} config {}\n", env!("CARGO_PKG_VERSION"), self.hash())
    }

    pub fn cost(&self) -> CostModel {
        CostModel { failed_probe_fraction: self.failed_probe_fraction }
    }

    pub fn pinch(&self) -> PinchConfig {
        PinchConfig {
            tau_water: self.tau_water,
            tau_land: self.tau_land,
            kappa: self.kappa,
            r_px: self.r_px,
            eps_px: self.dbscan_eps_px,
            min_pts: self.dbscan_min_pts,
            exec: Execution::Parallel,
        }
    }

    pub fn build(&self) -> BuildConfig {
        BuildConfig {
            pinch: self.pinch(),
            p_wind: self.p_wind,
            shore_dist_threshold_m: self.shore_dist_threshold_m,
            snap_radius_px: self.snap_radius_px,
            smooth_stride: self.smooth_stride,
            prune_tol_m: self.prune_tol_m,
            k_max: self.k_max,
            exec: Execution::Parallel,
        }
    }

    pub fn solver(&self, exec: Execution) -> SolverConfig {
        SolverConfig {
            max_expansions: self.max_expansions,
            time_limit: (self.time_limit_s > 0.0).then(|| Duration::from_secs_f64(self.time_limit_s)),
            exec,
            cost: self.cost(),
        }
    }

    pub fn bench(&self, per_world: bool, timing: bool) -> BenchConfig {
        BenchConfig {
            solver: self.solver(Execution::Sequential),
            exec: Execution::Parallel,
            cost: self.cost(),
            k_max: self.k_max,
            per_world,
            timing,
        }
    }

    pub fn generator(&self) -> GeneratorConfig {
        GeneratorConfig {
            nodes: (self.gen_nodes_min, self.gen_nodes_max),
            targets: (self.gen_targets_min, self.gen_targets_max),
            pinch_edges: (self.gen_pinch_min, self.gen_pinch_max),
            windy_edges: (self.gen_windy_min, self.gen_windy_max),
            block_prob: (self.gen_block_prob_min, self.gen_block_prob_max),
            p_wind: self.p_wind,
            extent_m: self.gen_extent_m,
            k_max: self.k_max,
        }
    }
}
