//! `pcctp`: extract water masks, build graphs, solve, evaluate, generate.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pcctp_core::evaluator::ActorKind;

use commands::{EvalArgs, SolveArgs};
use config::RunConfig;

/// A failed run and its exit status.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Input(String),
    Budget(String),
    Invariant(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Input(_) => 3,
            Failure::Budget(_) => 4,
            Failure::Invariant(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Input(m) | Failure::Budget(m) | Failure::Invariant(m) => m,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "pcctp", version, about = "Adaptive route planning over uncertain water channels")]
struct Cli {
    /// Flat TOML file with run parameters.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `seed` from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Aggregate per-image water masks into a probabilistic mask.
    Extract {
        /// Directory of `NAME_green` / `NAME_nir` band rasters, or of 0/1 masks with `--binary`.
        dir: PathBuf,
        #[arg(long)]
        binary: bool,
    },
    /// Build the routing graph from a probabilistic water mask.
    Graph {
        mask: PathBuf,
        #[arg(long, value_parser = parse_point)]
        start: (f64, f64),
        #[arg(long = "target", value_parser = parse_point, required = true)]
        targets: Vec<(f64, f64)>,
    },
    /// Compute the optimal policy for a graph.
    Solve {
        graph: PathBuf,
        /// Re-derive the expected cost by simulating every world.
        #[arg(long)]
        verify: bool,
        #[arg(long)]
        max_expansions: Option<usize>,
        /// Seconds.
        #[arg(long)]
        time_limit: Option<f64>,
    },
    /// Expected regret of each actor over a set of instances.
    Eval {
        /// Graph files or directories of them.
        graphs: Vec<PathBuf>,
        /// Add N seeded random instances.
        #[arg(long)]
        random: Option<u64>,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Actor::Pcctp, Actor::Greedy, Actor::Tsp, Actor::Cr])]
        actors: Vec<Actor>,
        /// Keep per-world rows in eval.json.
        #[arg(long)]
        per_world: bool,
        /// Write summary.csv with per-cell means.
        #[arg(long)]
        summary: bool,
        /// Write eval.json.
        #[arg(long)]
        json: bool,
        /// Record solver wall time (makes output run-dependent).
        #[arg(long)]
        timing: bool,
    },
    /// Write seeded random instances.
    Gen {
        #[arg(long, default_value_t = 10)]
        count: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Actor {
    Pcctp,
    Greedy,
    Tsp,
    Cr,
}

impl From<Actor> for ActorKind {
    fn from(a: Actor) -> Self {
        match a {
            Actor::Pcctp => ActorKind::Pcctp,
            Actor::Greedy => ActorKind::Greedy,
            Actor::Tsp => ActorKind::Tsp,
            Actor::Cr => ActorKind::Cr,
        }
    }
}

fn parse_point(s: &str) -> Result<(f64, f64), String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected X,Y, got {s:?}"))?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("bad coordinate {v:?}"));
    Ok((parse(x)?, parse(y)?))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(Failure::Usage)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Failure::Usage(format!("cannot start {jobs} workers: {e}")))?;
    }
    let out = &cli.out;
    match cli.command {
        Command::Extract { dir, binary } => commands::extract(&dir, binary, &config, out),
        Command::Graph { mask, start, targets } => commands::graph(&mask, start, &targets, &config, out),
        Command::Solve { graph, verify, max_expansions, time_limit } => {
            if let Some(m) = max_expansions {
                config.max_expansions = m;
            }
            if let Some(t) = time_limit {
                config.time_limit_s = t;
            }
            commands::solve_cmd(&graph, &SolveArgs { verify }, &config, out)
        }
        Command::Eval { graphs, random, actors, per_world, summary, json, timing } => {
            let mut kinds: Vec<ActorKind> = actors.into_iter().map(ActorKind::from).collect();
            kinds.dedup();
            let args = EvalArgs { graphs, random, actors: kinds, per_world, summary, json, timing };
            commands::eval(&args, &config, out)
        }
        Command::Gen { count } => commands::gen(count, &config, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
