use std::fs;
use std::path::{Path, PathBuf};

use pcctp_core::evaluator::{benchmark, ActorKind, BenchmarkResult, Instance};
use pcctp_core::exec::{self, Execution};
use pcctp_core::generator::{instance_seed, random_instance};
use pcctp_core::graph::StochasticGraph;
use pcctp_core::raster::{
    aggregate_masks, build_graph, classify_water, fit_bimodal_threshold, ndwi, parse_raster, BandRaster, GmmFit,
    ProbWaterMask, RasterError,
};
use pcctp_core::solver::{expected_cost, solve, SolveError};
use serde::Serialize;

use crate::config::RunConfig;
use crate::Failure;

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Failure::Input(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

fn read_band(path: &Path) -> Result<BandRaster, Failure> {
    parse_raster(&read(path)?).map(|(_, r)| r).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path, config: &RunConfig) -> Result<StochasticGraph, Failure> {
    StochasticGraph::from_json(&read(path)?, config.k_max).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct ImageRecord {
    name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    fit: Option<GmmFit>,
}

enum Source {
    Pair { name: String, green: PathBuf, nir: PathBuf },
    Mask(PathBuf),
}

fn list_files(dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    let entries = fs::read_dir(dir).map_err(|e| Failure::Usage(format!("cannot list {}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && !p.file_name().is_some_and(|n| n.to_string_lossy().starts_with('.')))
        .collect();
    files.sort();
    Ok(files)
}

/// Band pairs are `NAME_green.EXT` next to `NAME_nir.EXT`.
fn band_pairs(files: &[PathBuf]) -> Result<Vec<Source>, Failure> {
    let mut out = Vec::new();
    for f in files {
        let stem = f.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let ext = f.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_default();
        if let Some(name) = stem.strip_suffix("_green") {
            let nir = f.with_file_name(format!("{name}_nir{ext}"));
            if !files.contains(&nir) {
                return Err(Failure::Input(format!("{} has no matching {}", f.display(), nir.display())));
            }
            out.push(Source::Pair { name: name.to_string(), green: f.clone(), nir });
        } else if let Some(name) = stem.strip_suffix("_nir") {
            let green = f.with_file_name(format!("{name}_green{ext}"));
            if !files.contains(&green) {
                return Err(Failure::Input(format!("{} has no matching {}", f.display(), green.display())));
            }
        }
    }
    Ok(out)
}

pub fn extract(dir: &Path, binary: bool, config: &RunConfig, out: &Path) -> Result<(), Failure> {
    let files = list_files(dir)?;
    let sources: Vec<Source> = if binary {
        files.into_iter().map(Source::Mask).collect()
    } else {
        band_pairs(&files)?
    };
    if sources.is_empty() {
        return Err(Failure::Usage(format!("no input rasters in {}", dir.display())));
    }
    let per_image = exec::map(Execution::Parallel, &sources, |src| -> Result<(BandRaster, ImageRecord), Failure> {
        match src {
            Source::Mask(path) => {
                let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                Ok((read_band(path)?, ImageRecord { name, fit: None }))
            }
            Source::Pair { name, green, nir } => {
                let index = ndwi(&read_band(green)?, &read_band(nir)?)
                    .map_err(|e| Failure::Input(format!("{name}: {e}")))?;
                let fit = fit_bimodal_threshold(&index).map_err(|e| Failure::Input(format!("{name}: {e}")))?;
                let mask = classify_water(&index, fit.threshold);
                Ok((mask, ImageRecord { name: name.clone(), fit: Some(fit) }))
            }
        }
    });
    let mut masks = Vec::with_capacity(per_image.len());
    let mut images = Vec::with_capacity(per_image.len());
    for r in per_image {
        let (m, rec) = r?;
        masks.push(m);
        images.push(rec);
    }
    let mask = aggregate_masks(&masks).map_err(|e| Failure::Input(e.to_string()))?;
    write(&out.join("water_mask.pwm"), &(config.stamp() + &mask.to_text()))?;
    let sidecar = serde_json::json!({ "images": images, "meta": config.meta() });
    write(&out.join("water_mask.json"), &serde_json::to_string_pretty(&sidecar).expect("sidecar serializes"))?;
    eprintln!("extract: {} images aggregated into {}", images.len(), out.join("water_mask.pwm").display());
    Ok(())
}

pub fn graph(mask: &Path, start: (f64, f64), targets: &[(f64, f64)], config: &RunConfig, out: &Path) -> Result<(), Failure> {
    let mask = ProbWaterMask::from_text(&read(mask)?).map_err(|e| Failure::Input(format!("{}: {e}", mask.display())))?;
    let built = build_graph(&mask, start, targets, &config.build()).map_err(|e| match e {
        RasterError::Graph(pcctp_core::graph::GraphError::TooManyStochasticEdges { k, k_max }) => {
            eprintln!("warning: {k} stochastic edges survive pruning; the limit is {k_max}");
            Failure::Input(format!("{k} stochastic edges exceed k_max = {k_max}"))
        }
        other => Failure::Input(other.to_string()),
    })?;
    let path = out.join("graph.json");
    write(&path, &built.graph.to_json_with_meta(config.meta()))?;
    let r = &built.report;
    eprintln!(
        "graph: {} nodes, k = {} ({} pinch found, {} pruned, {} windy, {} redundant det edges dropped) -> {}",
        built.graph.node_count(),
        built.graph.k(),
        r.pinch_edges_found,
        r.pinch_edges_pruned,
        r.windy_edges,
        r.redundant_det_edges,
        path.display()
    );
    Ok(())
}

pub struct SolveArgs {
    pub verify: bool,
}

pub fn solve_cmd(graph: &Path, args: &SolveArgs, config: &RunConfig, out: &Path) -> Result<(), Failure> {
    let g = load_graph(graph, config)?;
    let (policy, stats) = solve(&g, &config.solver(Execution::Parallel)).map_err(|e| match e {
        SolveError::DeadEnd(_) => Failure::Invariant(e.to_string()),
        other => Failure::Input(other.to_string()),
    })?;
    let mut doc = serde_json::to_value(&policy).expect("policy serializes");
    let obj = doc.as_object_mut().expect("policy is an object");
    obj.insert(
        "stats".into(),
        serde_json::json!({
            "expansions": stats.expansions,
            "tree_nodes": stats.tree_nodes,
            "optimal": stats.optimal,
            "root_f_m": stats.root_f_m,
        }),
    );
    obj.insert("meta".into(), config.meta());
    let path = out.join("policy.json");
    write(&path, &serde_json::to_string_pretty(&doc).expect("policy serializes"))?;
    eprintln!(
        "solve: f(r) = {:.6} m, {} expansions, {} tree nodes, {:.3} s{}",
        policy.expected_cost_m,
        stats.expansions,
        stats.tree_nodes,
        stats.wall_time_s,
        if stats.optimal { "" } else { " (budget exhausted, not optimal)" }
    );
    if !stats.optimal {
        return Err(Failure::Budget(format!("search budget exhausted after {} expansions", stats.expansions)));
    }
    if args.verify {
        let sim = expected_cost(&policy, &g, &config.cost()).map_err(|e| Failure::Invariant(e.to_string()))?;
        let f = policy.expected_cost_m;
        if (sim - f).abs() > 1e-9 * f.abs().max(1.0) {
            return Err(Failure::Invariant(format!("simulated expected cost {sim} differs from f(r) = {f}")));
        }
        eprintln!("verify: simulated expected cost {sim:.6} m matches f(r)");
    }
    Ok(())
}

pub struct EvalArgs {
    pub graphs: Vec<PathBuf>,
    pub random: Option<u64>,
    pub actors: Vec<ActorKind>,
    pub per_world: bool,
    pub summary: bool,
    pub json: bool,
    pub timing: bool,
}

fn collect_instances(args: &EvalArgs, config: &RunConfig) -> Result<Vec<Instance>, Failure> {
    let mut files = Vec::new();
    for p in &args.graphs {
        if p.is_dir() {
            files.extend(list_files(p)?.into_iter().filter(|f| f.extension().is_some_and(|e| e == "json")));
        } else {
            files.push(p.clone());
        }
    }
    let mut out = Vec::new();
    for f in files {
        let id = f.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        out.push(Instance { id, graph: load_graph(&f, config)? });
    }
    if let Some(n) = args.random {
        let gen = config.generator();
        for i in 0..n {
            let graph = random_instance(&gen, instance_seed(config.seed, i))
                .map_err(|e| Failure::Input(format!("random instance {i}: {e}")))?;
            out.push(Instance { id: format!("r{i:03}"), graph });
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct CsvRow<'a> {
    actor: &'a str,
    instance_id: &'a str,
    n_targets: usize,
    n_windy: usize,
    k: usize,
    expected_cost_m: f64,
    expected_regret_m: f64,
    solve_time_s: f64,
}

fn rows_csv(result: &BenchmarkResult, stamp: &str) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &result.rows {
        w.serialize(CsvRow {
            actor: &r.actor,
            instance_id: &r.instance_id,
            n_targets: r.n_targets,
            n_windy: r.n_windy,
            k: r.k,
            expected_cost_m: r.expected_cost_m,
            expected_regret_m: r.expected_regret_m,
            solve_time_s: r.solve_time_s,
        })
        .expect("row serializes");
    }
    if result.rows.is_empty() {
        w.write_record(["actor", "instance_id", "n_targets", "n_windy", "k", "expected_cost_m", "expected_regret_m", "solve_time_s"])
            .expect("header writes");
    }
    stamp.to_string() + &String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

fn cells_csv(result: &BenchmarkResult, stamp: &str) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["actor", "n_targets", "n_windy", "instances", "mean_regret_m"]).expect("header writes");
    for c in &result.cells {
        w.write_record([
            c.actor.clone(),
            c.n_targets.to_string(),
            c.n_windy.to_string(),
            c.instances.to_string(),
            c.mean_regret_m.to_string(),
        ])
        .expect("row writes");
    }
    stamp.to_string() + &String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

pub fn eval(args: &EvalArgs, config: &RunConfig, out: &Path) -> Result<(), Failure> {
    let instances = collect_instances(args, config)?;
    if instances.is_empty() {
        return Err(Failure::Usage("no instances: pass graph files or --random N".into()));
    }
    let result = benchmark(&instances, &args.actors, &config.bench(args.per_world, args.timing));
    let stamp = config.stamp();
    write(&out.join("eval.csv"), &rows_csv(&result, &stamp))?;
    if args.summary {
        write(&out.join("summary.csv"), &cells_csv(&result, &stamp))?;
    }
    if args.json {
        let doc = serde_json::json!({
            "rows": result.rows,
            "cells": result.cells,
            "failures": result.failures,
            "meta": config.meta(),
        });
        write(&out.join("eval.json"), &serde_json::to_string_pretty(&doc).expect("report serializes"))?;
    }
    for f in &result.failures {
        eprintln!("eval: {} on {} failed: {}", f.actor, f.instance_id, f.error);
    }
    eprintln!("eval: {} rows over {} instances, {} failures", result.rows.len(), instances.len(), result.failures.len());
    if result.rows.is_empty() {
        return Err(Failure::Input("every instance failed".into()));
    }
    Ok(())
}

pub fn gen(count: u64, config: &RunConfig, out: &Path) -> Result<(), Failure> {
    let gen = config.generator();
    let meta = config.meta();
    for i in 0..count {
        let g = random_instance(&gen, instance_seed(config.seed, i))
            .map_err(|e| Failure::Input(format!("random instance {i}: {e}")))?;
        write(&out.join(format!("r{i:03}.json")), &g.to_json_with_meta(meta.clone()))?;
    }
    eprintln!("gen: wrote {count} instances to {}", out.display());
    Ok(())
}
