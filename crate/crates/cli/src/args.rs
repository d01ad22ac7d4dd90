use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "ted", version, about = "Top-k edge-diversified pattern mining")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mine patterns with one algorithm.
    Mine(MineArgs),
    /// Run several algorithms on one database and compare them.
    Bench(BenchArgs),
    /// Write the graph-by-pattern containment matrix.
    Matrix(MatrixArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Graph database in line format.
    #[arg(long)]
    pub input: PathBuf,
    /// Number of patterns.
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// Largest pattern size in edges.
    #[arg(long, default_value_t = 10)]
    pub emax: usize,
    /// Swap threshold weight in [0, 1].
    #[arg(long, default_value = "1.0")]
    pub alpha: String,
    /// Support threshold for the frequent-pattern baselines.
    #[arg(long, default_value_t = 0.2)]
    pub minsup: f64,
    /// Worker threads for the parallel phases.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Abort after this many seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
    /// Largest candidate pool for the exact solver.
    #[arg(long, default_value_t = 25)]
    pub opt_candidate_cap: usize,
    /// Largest number of embeddings of one pattern in one graph.
    #[arg(long, default_value_t = 10_000_000)]
    pub embedding_guard: u64,
}

#[derive(Debug, Args)]
pub struct MineArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "ted")]
    pub algo: String,
    /// Pattern file (standard output when omitted).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Metrics report.
    #[arg(long)]
    pub metrics: Option<PathBuf>,
    /// Containment matrix of the mined patterns.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated algorithm names.
    #[arg(long, default_value = "ted,all_g")]
    pub algos: String,
    /// Comparison table (standard output when omitted).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Reports of every run.
    #[arg(long)]
    pub metrics: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MatrixArgs {
    #[command(flatten)]
    pub common: Common,
    /// Patterns to test; mined with --algo when omitted.
    #[arg(long)]
    pub patterns: Option<PathBuf>,
    #[arg(long, default_value = "ted")]
    pub algo: String,
    /// Matrix file (standard output when omitted).
    #[arg(long)]
    pub matrix: Option<PathBuf>,
}
