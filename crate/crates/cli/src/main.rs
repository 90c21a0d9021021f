//! `salem`: batch front end for constructing Cantor measures and running the
//! Fourier, dimension, energy and sumset checks from JSON configs.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use salem_core::Error;

#[derive(Parser, Debug)]
#[command(name = "salem", version, about = "Random Cantor measures and sumset desk checks")]
struct Cli {
    /// JSON configuration for the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed override; recorded in every output.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: available cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Build a certified random Cantor measure.
    Construct,
    /// Scan the transform of a stored measure over the check grid.
    FourierScan,
    /// Hausdorff and Fourier dimension estimates.
    Dim,
    /// Riesz energy by direct summation and by the frequency-side integral.
    Energy,
    /// Sumset pipeline: cover measures, L2 proxy or convolution energy.
    Sumset,
    /// Re-check the certificates stored with a measure.
    Verify,
    /// Write a level of a stored measure as CSV or JSON.
    Export,
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Usage, configuration or input errors.
    Config(anyhow::Error),
    /// Construction or certificate failures.
    Construction(anyhow::Error),
    /// Numerical nonconvergence.
    Numerical(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Construction(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Config(e) | Failure::Construction(e) | Failure::Numerical(e) => e,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::RetryExhausted { .. } => Failure::Construction(e.into()),
            Error::NonconvergentTail { .. } => Failure::Numerical(e.into()),
            _ => Failure::Config(e.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Config(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let ctx = match config::Context::load(cli.config.as_deref(), cli.seed, &cli.out) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::Construct => commands::construct(&ctx),
        Command::FourierScan => commands::fourier_scan(&ctx),
        Command::Dim => commands::dim(&ctx),
        Command::Energy => commands::energy(&ctx),
        Command::Sumset => commands::sumset(&ctx),
        Command::Verify => commands::verify(&ctx),
        Command::Export => commands::export(&ctx),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}
