//! `font`: simulate multi-site data, run federated clustering and its
//! comparators, and aggregate run reports into plot-ready tables.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use font_core::benchmarks::Method;
use font_core::federation::Transport;
use font_core::simdata::Regime;
use font_core::FontError;

use config::DataKind;

#[derive(Debug, Parser)]
#[command(name = "font", version, about = "Federated one-shot ensemble clustering")]
struct Cli {
    /// Worker threads; defaults to the number of cores. Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// More log output on stderr (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a multi-site dataset: one CSV per site plus manifest.json.
    Simulate(SimulateArgs),
    /// Run FONT and the comparators on a dataset or a simulated grid.
    Run(RunArgs),
    /// Pool run reports into one summary table.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Output directory, created atomically.
    #[arg(long)]
    pub out: PathBuf,
    /// TOML or JSON config; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub kind: Option<DataKind>,
    #[arg(long)]
    pub regime: Option<Regime>,
    /// Number of sites.
    #[arg(long)]
    pub m: Option<usize>,
    /// Per-coordinate noise variance.
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// Number of clusters.
    #[arg(long)]
    pub k: Option<usize>,
    /// Dimension of the Gaussian data.
    #[arg(long)]
    pub p: Option<usize>,
    /// Smallest site size.
    #[arg(long)]
    pub n_min: Option<usize>,
    /// Largest site size.
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Master seed; falls back to FONT_SEED, then the config file.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Replace an existing output directory.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Output directory for report.json, results.csv and timings.csv.
    #[arg(long)]
    pub out: PathBuf,
    /// Dataset written by `simulate`. Without it a grid is simulated.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// TOML or JSON config with a `[run]` table; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Comma-separated methods: font, local, consensus, kfed, pooled, best_local.
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<Method>>,
    /// Final cluster count; FONT selects one when absent.
    #[arg(long)]
    pub k: Option<usize>,
    /// Replicates per cell (per dataset with --data).
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Master seed; falls back to FONT_SEED, then the config file.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Permit methods that pool raw data or read the truth.
    #[arg(long)]
    pub allow_oracle: bool,
    /// Split every site into bootstrap replicas, each fitting its own model.
    #[arg(long)]
    pub pseudo_sites: bool,
    /// How messages cross the site boundary.
    #[arg(long, value_enum)]
    pub transport: Option<TransportArg>,
    /// Grid regimes (simulation mode).
    #[arg(long, value_delimiter = ',')]
    pub regimes: Option<Vec<Regime>>,
    /// Grid site counts (simulation mode).
    #[arg(long, value_delimiter = ',')]
    pub m: Option<Vec<usize>>,
    /// Grid noise variances (simulation mode).
    #[arg(long, value_delimiter = ',')]
    pub sigma2: Option<Vec<f64>>,
    /// Replace an existing output directory.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum TransportArg {
    InProcess,
    Json,
}

impl From<TransportArg> for Transport {
    fn from(t: TransportArg) -> Self {
        match t {
            TransportArg::InProcess => Transport::InProcess,
            TransportArg::Json => Transport::Json,
        }
    }
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// report.json files, or directories searched for them.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Summary CSV to write.
    #[arg(long)]
    pub out: PathBuf,
}

const EXIT_USAGE: u8 = 1;
const EXIT_PARTIAL: u8 = 2;
const EXIT_ORACLE: u8 = 3;

/// How a subcommand finished.
pub enum Outcome {
    Ok,
    /// Outputs were written but some replicates failed.
    Partial(usize),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).parse_env("FONT_LOG").init();

    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(EXIT_USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }

    let result = match &cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Run(a) => commands::run(a),
        Command::Report(a) => commands::report(a),
    };
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Partial(n)) => {
            eprintln!("warning: {n} method runs failed; see failures in report.json");
            ExitCode::from(EXIT_PARTIAL)
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                FontError::OracleNotAllowed(_) => ExitCode::from(EXIT_ORACLE),
                _ => ExitCode::from(EXIT_USAGE),
            }
        }
    }
}
