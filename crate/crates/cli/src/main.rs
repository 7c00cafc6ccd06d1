//! `rdnet`: solve equilibria, check pairwise stability and run experiments.
//!
//! Exit codes: 0 success, 2 invalid input, 3 solver failure, 4 enumeration
//! too large, 5 unknown experiment.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod failure;

#[derive(Debug, Parser)]
#[command(name = "rdnet", version, about = "R&D collaboration networks with heterogeneous productivities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the equilibrium of one instance on one network.
    Solve(SolveArgs),
    /// Pairwise stability checks.
    #[command(subcommand)]
    Stability(StabilityCommand),
    /// Run an experiment: fig1, fig2, fig3, fig4, fig5, fig6, figA1, figA2.
    Experiment(ExperimentArgs),
}

/// Where the instance comes from: a JSON file or inline two-type parameters.
#[derive(Debug, Clone, Args)]
pub struct InstanceArgs {
    /// Instance JSON file with alpha, c_bar, phi and thetas or two_type.
    #[arg(long, conflicts_with = "two_type")]
    pub instance: Option<PathBuf>,
    /// Inline two-type economy as N:RHO:THETA_LOW (alpha = 2, c_bar = 1).
    #[arg(long, value_name = "N:RHO:THETA")]
    pub two_type: Option<String>,
    /// R&D cost for inline instances; defaults to just above the cost lower bound.
    #[arg(long, requires = "two_type")]
    pub phi: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// complete | empty | pa | er:<link probability> | file:<edge list path>
    #[arg(long, default_value = "complete")]
    pub network: String,
    /// Output directory for equilibrium.json.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Seed for random networks.
    #[arg(long, env = "RDNET_SEED")]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum StabilityCommand {
    /// Check one network; writes stability.json.
    Check(CheckArgs),
    /// Check every network on the instance's firms; writes enumeration.csv.
    Enumerate(EnumerateArgs),
    /// Stability of a structure over a (theta, phi) grid; writes region.csv.
    Region(RegionArgs),
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long, default_value = "complete")]
    pub network: String,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, env = "RDNET_SEED")]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Keep one network per class of relabellings among equally productive firms.
    #[arg(long)]
    pub dedup: bool,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegionStructure {
    Complete,
    Pa,
}

#[derive(Debug, Args)]
pub struct RegionArgs {
    #[arg(long, value_enum, default_value = "complete")]
    pub structure: RegionStructure,
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    /// Low-type productivity grid LO:HI:POINTS, evenly spaced.
    #[arg(long, default_value = "0.01:0.99:99")]
    pub thetas: String,
    /// R&D cost grid LO:HI:POINTS, log-spaced; defaults to one decade above the bound.
    #[arg(long)]
    pub phis: Option<String>,
    /// Read the phi grid as phi / n.
    #[arg(long)]
    pub per_firm: bool,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Experiment id.
    pub id: String,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Base seed; falls back to RDNET_SEED, then to the built-in default.
    #[arg(long, env = "RDNET_SEED")]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Also write one row per replication.
    #[arg(long)]
    pub raw: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => commands::solve(&args),
        Command::Stability(StabilityCommand::Check(args)) => commands::check(&args),
        Command::Stability(StabilityCommand::Enumerate(args)) => commands::enumerate(&args),
        Command::Stability(StabilityCommand::Region(args)) => commands::region(&args),
        Command::Experiment(args) => commands::experiment(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
