//! Experiment runner binding all modules: argument parsing with config-file
//! defaults, seeded execution, CSV/JSON emission and the acceptance report.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage/validation error.

mod commands;
mod config;
mod output;

pub use output::{csv_bytes, emit, fmt_f64, write_atomic};

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "sensornet",
    about = "Connectivity, capacity, clock-synchronization and in-network \
             computation experiments for large sensor networks",
    version
)]
pub struct Cli {
    /// TOML config file supplying defaults (flags always win).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for trial-parallel experiments (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Master seed (subcommand config values take precedence over this).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output path (stdout when omitted).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo connectivity probability experiments.
    Connectivity(ConnectivityArgs),
    /// Cell-scheme capacity scaling experiments.
    Capacity(CapacityArgs),
    /// Clock synchronization estimators and smoothing experiments.
    Clocks(ClocksArgs),
    /// Function computation operations.
    Compute(ComputeArgs),
    /// Runs the full acceptance suite and emits a markdown report.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct ConnectivityArgs {
    /// Graph model: range, knn or er.
    #[arg(long)]
    pub model: Option<String>,
    /// Node count.
    #[arg(long)]
    pub n: Option<usize>,
    /// Single-point parameter (r for range, k for knn, p for er).
    #[arg(long)]
    pub param: Option<f64>,
    /// Sweep c over lo:hi:step; maps to r (range) or p (er) through the
    /// critical scaling (ln n + c)/n.
    #[arg(long, value_name = "LO:HI:STEP", allow_hyphen_values = true)]
    pub c_grid: Option<String>,
    /// Sweep k over lo:hi:step (knn model).
    #[arg(long, value_name = "LO:HI:STEP")]
    pub k_grid: Option<String>,
    /// Monte Carlo trials per grid point.
    #[arg(long)]
    pub trials: Option<u64>,
}

#[derive(Debug, Args)]
pub struct CapacityArgs {
    /// Comma-separated node counts, e.g. 64,256,1024.
    #[arg(long, value_name = "N1,N2,...")]
    pub n_grid: Option<String>,
    /// Protocol-model guard factor.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Cell-side scale: side = sqrt(kappa ln n / n).
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Measurement rounds (TDMA cycles); warm-up is sized automatically.
    #[arg(long)]
    pub rounds: Option<u64>,
    /// Physical-model path loss exponent (enables physical rows).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Physical-model SINR threshold.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Physical-model ambient noise power.
    #[arg(long)]
    pub noise: Option<f64>,
    /// Physical-model per-node power cap.
    #[arg(long)]
    pub p_ind: Option<f64>,
    /// Use the literal unweighted interference sum in SINR checks.
    #[arg(long)]
    pub literal_eq1: bool,
}

#[derive(Debug, Args)]
pub struct ClocksArgs {
    /// Topology: path, star, complete, lattice or rgg.
    #[arg(long)]
    pub topology: Option<String>,
    /// Node count (lattice rounds down to a square).
    #[arg(long)]
    pub n: Option<usize>,
    /// Mode: pairwise, polyhedron, ls, smooth-async, smooth-sync, variance
    /// or settling.
    #[arg(long)]
    pub mode: Option<String>,
    /// Gaussian measurement noise variance (0 = noiseless).
    #[arg(long)]
    pub noise_var: Option<f64>,
    /// Trials for the pairwise mode.
    #[arg(long)]
    pub trials: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    /// Operation: classify, tree-code, dag-bounds, parity, histogram,
    /// fooling, threshold, interval or and-block.
    #[arg(long)]
    pub op: Option<String>,
    /// Builtin function: max, min, parity, sum, and, threshold:t or
    /// interval:a:b.
    #[arg(long)]
    pub function: Option<String>,
    /// Extensional table file (lines `x1 x2 ... -> value`).
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Argument count for builtin functions.
    #[arg(long)]
    pub n: Option<usize>,
    /// Alphabet size for builtin functions (default 2).
    #[arg(long)]
    pub alphabet: Option<usize>,
    /// Threshold count, or comma-separated type-threshold vector for
    /// classify.
    #[arg(long)]
    pub theta: Option<String>,
    /// Interval lower bound.
    #[arg(long)]
    pub a: Option<usize>,
    /// Interval upper bound.
    #[arg(long)]
    pub b: Option<usize>,
    /// Type-sensitivity fraction in (0,1).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Block length for and-block / parity.
    #[arg(long)]
    pub block_n: Option<usize>,
    /// Blocks for histogram aggregation.
    #[arg(long)]
    pub blocks: Option<usize>,
    /// Fraction of the leaf block routed on the direct edge in the parity
    /// scheme.
    #[arg(long)]
    pub split: Option<f64>,
    /// Comma-separated node counts for histogram scaling runs.
    #[arg(long, value_name = "N1,N2,...")]
    pub n_grid: Option<String>,
    /// Connectivity-range constant c for histogram runs.
    #[arg(long)]
    pub c: Option<f64>,
    /// Protocol guard factor for histogram runs.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Use the average-case (uniform distribution) coding mode.
    #[arg(long)]
    pub avg: bool,
}

#[derive(Debug, Args)]
pub struct ReportArgs {}

/// Parses the command line and runs it; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles help/version as "errors" with success status
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let file_config = match &cli.config {
        Some(path) => match config::load(path) {
            Ok(cfg) => cfg,
            Err(e) => {
                eprintln!("sensornet: {e}");
                return 2;
            }
        },
        None => config::FileConfig::default(),
    };
    if let Some(threads) = cli.threads.or(file_config.global.threads) {
        // ignore failure if a global pool already exists (tests)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let globals = commands::Globals {
        seed: cli.seed,
        out: cli.out,
    };
    match commands::run(cli.command, file_config, globals) {
        Ok(()) => 0,
        Err(commands::CliError::Usage(msg)) => {
            eprintln!("sensornet: {msg}");
            2
        }
        Err(commands::CliError::Runtime(e)) => {
            eprintln!("sensornet: {e}");
            1
        }
    }
}

pub fn main() -> i32 {
    main_with_args(std::env::args_os())
}
