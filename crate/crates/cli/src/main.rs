//! Command-line front end: constants, landscapes, gadgets, SDP solve, rounding,
//! certificate verification and the end-to-end pipeline, all emitting JSON.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use iset_maxcut::Error;
use thiserror::Error as ThisError;

use config::{ConfigError, Overrides};

#[derive(Parser, Debug)]
#[command(name = "iset-maxcut", version, about = "Max-Cut with a large independent set")]
struct Cli {
    /// Seed for every random choice (default 0).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker thread cap.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Write the JSON document here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// `key = value` file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Critical constants.
    Constants,
    /// Maximum of the tripartite or bipartite cut landscape.
    Landscape {
        /// tripartite | bipartite
        #[arg(long)]
        kind: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        rho: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        /// Also write a CSV grid of the objective.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        grid: Option<usize>,
        /// μ₃ for the tripartite grid slice.
        #[arg(long)]
        mu3: Option<f64>,
    },
    /// Build and analyse a small gadget graph.
    Gadget {
        /// noisy | tripartite | known-iset | hidden-iset
        #[arg(long)]
        kind: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        rho: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        r: Option<usize>,
        /// Write the gadget in the graph text format.
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Solve the SDP for a graph file.
    Solve {
        graph: PathBuf,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long)]
        feas_tol: Option<f64>,
        #[arg(long)]
        obj_tol: Option<f64>,
    },
    /// Threshold rounding of a saved SDP solution.
    Round {
        graph: PathBuf,
        solution: PathBuf,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        b0: Option<f64>,
    },
    /// Interval certificate of the per-edge inequality.
    Verify {
        /// full (eta = 1e-13) | relaxed (eta = 0)
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        b0: Option<f64>,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        max_depth: Option<u32>,
        /// Replace t(1) by q + this value.
        #[arg(long, allow_hyphen_values = true)]
        top_offset: Option<f64>,
    },
    /// Solve, blend, round and bound in one go.
    Pipeline {
        graph: PathBuf,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        b0: Option<f64>,
        #[arg(long)]
        feas_tol: Option<f64>,
        #[arg(long)]
        obj_tol: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    Unverified,
}

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Compute(String),
    #[error(transparent)]
    Library(#[from] Error),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) | CliError::Config(_) => 2,
            CliError::Compute(_) => 1,
            CliError::Library(e) => library_code(e),
        }
    }
}

fn library_code(e: &Error) -> u8 {
    match e {
        Error::Stage { source, .. } => library_code(source),
        Error::Domain(_)
        | Error::BudgetExceeded { .. }
        | Error::DegenerateMarginal { .. }
        | Error::MissingAssignment(_)
        | Error::Parse { .. }
        | Error::NegativeWeight { .. }
        | Error::SelfLoop { .. }
        | Error::DimensionMismatch { .. }
        | Error::TargetAbove { .. } => 2,
        _ => 1,
    }
}

fn execute(cli: &Cli) -> Result<Status, CliError> {
    let overrides = match &cli.config {
        Some(path) => Overrides::load(path)?,
        None => Overrides::default(),
    };
    if let Some(n) = overrides.pick(cli.workers, "workers")? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| CliError::Compute(e.to_string()))?;
    }
    let seed = overrides.pick_or(cli.seed, "seed", 0u64)?;
    let out = overrides.pick(cli.out.clone(), "out")?;
    let outcome = commands::run(&cli.command, seed, &overrides)?;
    let text = serde_json::to_string_pretty(&outcome.document).map_err(|e| CliError::Compute(e.to_string()))?;
    match out {
        Some(path) => std::fs::write(&path, text + "\n").map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?,
        None => println!("{text}"),
    }
    Ok(outcome.status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(Status::Success) => ExitCode::SUCCESS,
        Ok(Status::Unverified) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
