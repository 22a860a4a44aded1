use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

/// Directed scattering autoencoder toolkit.
#[derive(Debug, Parser)]
#[command(name = "dsae", version)]
struct Cli {
    /// Top-level seed; per-run seeds are `seed + run`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for independent benchmark cells (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (created if missing). `stats` prints to stdout when unset.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Vertex and edge counts, reciprocity, Krackhardt hierarchy and mean curvature.
    Stats {
        graph: PathBuf,
        /// Restrict to the largest weakly connected component first.
        #[arg(long)]
        lcc: bool,
    },
    /// Train an autoencoder on one graph and write node embeddings.
    Embed {
        graph: PathBuf,
        /// Verify every row is finite and strictly inside the ball.
        #[arg(long)]
        check: bool,
    },
    /// Link-direction prediction benchmark.
    Linkpred {
        graph: PathBuf,
        #[arg(long)]
        runs: Option<usize>,
        /// JSON list of grid rows; overrides the config's grid.
        #[arg(long)]
        grid: Option<PathBuf>,
        /// Run the charge x scale ablation grid.
        #[arg(long)]
        ablation: bool,
    },
    /// Infer a cross-cell-type signaling network from expression data.
    Infer(InferArgs),
    /// Test an inferred network against spatial co-expression.
    ValidateSpatial {
        /// `network.json` written by `infer`.
        #[arg(long)]
        network: PathBuf,
        /// Cells x genes CSV.
        #[arg(long)]
        spatial: PathBuf,
        /// `cell,cell_type,fov[,x,y]` CSV.
        #[arg(long)]
        spatial_labels: PathBuf,
    },
}

#[derive(Debug, Args)]
struct InferArgs {
    /// Cells x genes CSV.
    #[arg(long)]
    expression: PathBuf,
    /// `cell,cell_type` CSV.
    #[arg(long)]
    labels: PathBuf,
    /// Prior gene network edge list.
    #[arg(long)]
    prior: PathBuf,
    /// `gene,intercellular` CSV.
    #[arg(long)]
    annotation: PathBuf,
    #[arg(long)]
    type_a: Option<String>,
    #[arg(long)]
    type_b: Option<String>,
    /// Neighbours per gene in the embedding kNN graph.
    #[arg(long)]
    k: Option<usize>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}
