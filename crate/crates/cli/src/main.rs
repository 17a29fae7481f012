#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! `statpriv` command-line harness.

mod bound;
mod io;
mod optimize;
mod parse;
mod release;
mod svg;
mod sweep;
mod synth;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

#[derive(Parser, Debug)]
#[command(name = "statpriv", version, about = "Summary-statistic private data release")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Flags accepted by every subcommand. Each overrides the matching config-file field.
#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// JSON config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// gaussian | uniform | exponential | shifted_exponential | geometric | poisson | binomial:N | categorical:C
    #[arg(long, global = true)]
    pub family: Option<String>,
    /// mean | std | quantile:ALPHA | fraction:J
    #[arg(long, global = true)]
    pub secret: Option<String>,
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Worker threads (defaults to STATPRIV_THREADS, then all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Release a dataset through a quantization mechanism.
    Release(release::ReleaseArgs),
    /// Privacy/distortion sweep over mechanisms and hyperparameters.
    Sweep(sweep::SweepArgs),
    /// Lower-bound tables.
    Bound(bound::BoundArgs),
    /// Synthesize a mechanism for a single-parameter family.
    Optimize(optimize::OptimizeArgs),
    /// Generate a synthetic dataset.
    Synth(synth::SynthArgs),
}

/// Explicit usage error (exit code 2).
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct Usage(pub String);

pub fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Usage(msg.into()).into())
}

/// Parse a JSON config file, or start from defaults.
pub fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            serde_json::from_str(&text).map_err(|e| Usage(format!("{}: {e}", p.display())).into())
        }
    }
}

/// Sweeps whose rows contain errors exit with this status.
pub struct PartialFailure;

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<Usage>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<statpriv::Error>() {
            return match e {
                statpriv::Error::Config(_) => 2,
                statpriv::Error::Infeasible(_) => 4,
                _ => 3,
            };
        }
    }
    2
}

fn init_threads(flag: Option<usize>) -> Result<()> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("STATPRIV_THREADS") {
            Ok(v) if !v.trim().is_empty() => {
                Some(v.trim().parse().map_err(|_| Usage(format!("STATPRIV_THREADS=`{v}` is not a count")))?)
            }
            _ => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return usage("thread count must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("thread pool")?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<Option<PartialFailure>> {
    init_threads(cli.common.threads)?;
    let c = &cli.common;
    match cli.command {
        Command::Release(a) => release::run(c, a).map(|_| None),
        Command::Sweep(a) => sweep::run(c, a),
        Command::Bound(a) => bound::run(c, a).map(|_| None),
        Command::Optimize(a) => optimize::run(c, a).map(|_| None),
        Command::Synth(a) => synth::run(c, a).map(|_| None),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let quiet = cli.common.quiet;
    match run(cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(PartialFailure)) => {
            if !quiet {
                eprintln!("statpriv: some sweep points failed; see the error column");
            }
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("statpriv: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
