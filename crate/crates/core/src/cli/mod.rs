//! `sgenome` command-line interface.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data or parse
//! error, 3 internal invariant violation.

mod commands;
mod manifest;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;

pub use manifest::Manifest;

#[derive(Debug, Parser)]
#[command(name = "sgenome", version, about = "Topic genotypes, influence backbones and latency minimization")]
pub struct Cli {
    /// Worker threads for parallel stages (outputs do not depend on it).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct DataArgs {
    /// Dataset manifest naming `edges`, `events` and `topics` files.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse the dataset and report its size and digests.
    IngestCheck {
        #[command(flatten)]
        data: DataArgs,
    },
    /// Per-user genotype values and summaries.
    Genome {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        topic: Option<String>,
        #[arg(long)]
        metric: Option<String>,
    },
    /// Influence backbones and their comparison with the follower graph.
    Backbone {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        topic: Option<String>,
    },
    /// Leave-one-hashtag-out topic classification, optionally with
    /// ensemble-size accuracy curves.
    Classify {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        metric: Option<String>,
        /// Comma-separated ensemble sizes for accuracy curves.
        #[arg(long, value_delimiter = ',')]
        ensemble_sizes: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        repetitions: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Also report training error.
        #[arg(long)]
        train: bool,
    },
    /// Influencer and adopter prediction AUCs.
    Predict {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        topic: Option<String>,
    },
    /// k-LatMin heuristics on topic latency graphs.
    Latmin {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        topic: Option<String>,
        #[arg(long, default_value_t = 25)]
        k: usize,
        /// Require strong connectivity (default).
        #[arg(long, conflicts_with = "permissive")]
        strict: bool,
        /// Average over reachable pairs only.
        #[arg(long)]
        permissive: bool,
        #[arg(long, default_value_t = 500)]
        max_nodes: usize,
    },
    /// Generate a synthetic dataset.
    Syngen {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// small, classification, classification-null or prediction.
        #[arg(long, default_value = "small")]
        preset: String,
    },
    /// Merge the summaries of earlier commands in `--out` into `report.json`.
    Report {
        #[arg(long)]
        out: PathBuf,
    },
}

/// Failure of one CLI run.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(String),
    Internal(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Internal(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Internal(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::InvalidArgument(_)
            | Error::UnknownTopic(_)
            | Error::UnknownHashtag(_)
            | Error::BudgetExceeded { .. } => Failure::Usage(msg),
            Error::Invariant(_) => Failure::Internal(msg),
            _ => Failure::Data(msg),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

pub fn run(cli: Cli) -> Result<(), Failure> {
    let pool = match cli.workers {
        Some(0) => return Err(Failure::Usage("--workers must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    }
    .map_err(|e| Failure::Internal(e.to_string()))?;
    pool.install(|| commands::dispatch(cli.command))
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

pub fn main() -> ExitCode {
    main_with(std::env::args_os())
}
