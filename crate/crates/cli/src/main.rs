//! `hee` — operator surface for the hierarchical exponential-family
//! energy-based model: train on synthetic 2-D targets or IDX images,
//! generate by joint/marginal/ancestral routes, and run the diagnostic
//! suite (Hessian spectra, depth/width sweeps, autocorrelation, mode
//! coverage, histogram KL, oscillation spectra, sampler benches).
//!
//! Every command honors `--seed`s carried in its inputs; identical
//! invocations produce byte-identical primary outputs (wallclock columns
//! excluded). Exit codes: 0 ok, 2 usage/config, 3 training diverged,
//! 4 I/O.

mod commands;
mod config;

use clap::{Parser, Subcommand};
use hee_core::error::HeeError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "hee", version, about = "Hierarchical exponential-family energy-based model")]
struct Cli {
    /// Worker thread cap (HEE_THREADS overrides).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model from a JSON run config; writes a checkpoint and a
    /// training log.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Checkpoint output path (JSON).
        #[arg(long)]
        out: PathBuf,
        /// Training-log CSV path (default: checkpoint path + "_log.csv").
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Generate observation samples from a trained checkpoint.
    Generate(commands::GenerateArgs),
    /// Diagnostics over models, chains and sample files.
    Analyze {
        #[command(subcommand)]
        what: commands::AnalyzeCmd,
    },
    /// Head-to-head sampler benches.
    Bench {
        #[command(subcommand)]
        what: commands::BenchCmd,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let threads = std::env::var("HEE_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .or(cli.threads);
    if let Some(n) = threads {
        // a pool may already exist in tests that call main twice; ignore
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }

    let result = match cli.command {
        Command::Train { config, out, log } => commands::cmd_train(&config, &out, log.as_deref()),
        Command::Generate(args) => commands::cmd_generate(&args),
        Command::Analyze { what } => commands::cmd_analyze(&what),
        Command::Bench { what } => commands::cmd_bench(&what),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &HeeError) -> u8 {
    match e {
        HeeError::InvalidConfig(_) | HeeError::BadCheckpoint(_) => 2,
        HeeError::Diverged { .. } => 3,
        HeeError::Io(_) | HeeError::BadMagic { .. } | HeeError::TruncatedFile(_) => 4,
        HeeError::Json(_) => 4,
        _ => 1,
    }
}
