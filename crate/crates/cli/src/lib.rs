//! Command-line experiments over repeater chains and repeater placement.

pub mod benchmark;
pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

pub use commands::{run, RunRecord};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("simulation error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl From<repeater_ad::Error> for CliError {
    fn from(e: repeater_ad::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("i/o: {e}"))
    }
}

/// Validation failures of user input are config errors.
pub(crate) fn invalid(e: repeater_ad::Error) -> CliError {
    CliError::Config(e.to_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolFlag {
    Single,
    Multi,
}

#[derive(Debug, Parser)]
#[command(name = "repeater-ad", version, about = "Key rates, derivatives and placement for quantum repeater chains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; a random one is drawn and printed when absent.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Sample count (the main estimate of each command).
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub protocol: Option<ProtocolFlag>,
    /// Worker threads; 1 gives bitwise reproducible runs on any machine.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Estimate the key rate of the configured chain.
    ChainSim {
        /// Also write per-sample values to samples.csv.
        #[arg(long)]
        sample_csv: bool,
    },
    /// Optimize per-link bright-state parameters.
    Optimize,
    /// Derivative of the key rate with respect to every node's coherence time.
    Sensitivity,
    /// Sweep a repeater's position comparing AD with central differences.
    FdCompare,
    /// Place repeaters among fixed end nodes.
    Place {
        /// Repeater counts, overriding the config.
        #[arg(long, value_delimiter = ',')]
        n: Vec<usize>,
    },
    /// Fit the utility-versus-repeater-count curve from placement results.
    Analyze {
        /// Directory holding placement_n*.json files.
        results: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0.05")]
        delta: Vec<f64>,
    },
    /// Time primal and derivative samples against chain length.
    Benchmark {
        #[arg(long)]
        max_links: Option<usize>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::ChainSim { .. } => "chain-sim",
            Command::Optimize => "optimize",
            Command::Sensitivity => "sensitivity",
            Command::FdCompare => "fd-compare",
            Command::Place { .. } => "place",
            Command::Analyze { .. } => "analyze",
            Command::Benchmark { .. } => "benchmark",
        }
    }
}

/// Parses `args`, runs, prints errors and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
