// Copyright 2026 The qnet Authors
// SPDX-License-Identifier: Apache-2.0

//! `qnet`: generate networks, probe them, reconstruct them from probe data,
//! and run parameter sweeps.
//!
//! Exit codes: 0 success, 1 I/O or numerical failure, 2 usage or data error,
//! 3 reconstruction stopped at the iteration limit.

mod commands;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{CliError, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(name = "qnet", version, about = "Sink-probe network reconstruction")]
struct Cli {
    /// Worker threads for fitness evaluation and sweep cells (outputs do not
    /// depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw a random network.
    Generate(GenerateArgs),
    /// Simulate a probing procedure on a network.
    Probe(ProbeArgs),
    /// Reconstruct a network from probe data.
    Reconstruct(ReconstructArgs),
    /// Run a parameter sweep.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub nodes: usize,
    #[arg(long)]
    pub seed: u64,
    /// Fixed Erdős–Rényi edge probability; drawn uniformly per attempt if absent.
    #[arg(long)]
    pub edge_prob: Option<f64>,
    /// Keep the first draw even if disconnected (requires --edge-prob).
    #[arg(long, requires = "edge_prob")]
    pub allow_disconnected: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("procedure").required(true).args(["excitation", "pairs"])))]
#[command(group(clap::ArgGroup::new("grid").required(true).args(["times", "auto_schedule"])))]
pub struct ProbeArgs {
    #[arg(long)]
    pub network: PathBuf,
    /// Fixed-excitation procedure: inject here, sink on every other node.
    #[arg(long)]
    pub excitation: Option<usize>,
    /// Multi-injection procedure: the first COUNT seed-shuffled ordered pairs, or `all`.
    #[arg(long, value_name = "COUNT|all")]
    pub pairs: Option<String>,
    #[arg(long, default_value_t = qnet_core::dynamics::DEFAULT_GAMMA)]
    pub gamma: f64,
    #[arg(long, default_value_t = qnet_core::dynamics::DEFAULT_T0)]
    pub t0: f64,
    /// Measurement times, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
    /// Centre the measurement window on the bundled peak-FDC time model.
    #[arg(long)]
    pub auto_schedule: bool,
    #[arg(long, default_value_t = qnet_core::probing::DEFAULT_TIME_COUNT)]
    pub time_count: usize,
    /// Orders the pairs for --pairs.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[arg(long)]
    pub target_data: PathBuf,
    /// GA configuration JSON; absent keys take defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ExperimentKind {
    Fdc,
    Pop,
    Configs,
    Minpop,
    Maxconn,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long, value_enum)]
    pub kind: ExperimentKind,
    /// Sweep configuration JSON; absent keys take defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

fn run(cli: Cli) -> Result<u8, CliError> {
    if let Some(k) = cli.threads {
        if k == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Generate(a) => commands::generate(&a),
        Command::Probe(a) => commands::probe(&a),
        Command::Reconstruct(a) => commands::reconstruct(&a),
        Command::Experiment(a) => commands::experiment(&a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("QNET_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("qnet: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
