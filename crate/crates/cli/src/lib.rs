//! Command implementations behind the `freqpix` binary.
//!
//! Exit codes: 0 on success, 1 when processing ran but something failed,
//! 2 when flags, configuration or inputs were rejected before any output was
//! written.

use clap::{Parser, Subcommand};

pub mod augment;
pub mod connectivity;
pub mod inspect;
pub mod render;
pub mod sweep;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURES: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "freqpix", version, about = "Frequency-pixel mixing augmentation and connectivity tools")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Augment every record of a manifest.
    Augment(augment::AugmentArgs),
    /// Estimate rho/alpha/beta/gamma connectivity, optionally before and after augmentation.
    Connectivity(connectivity::ConnectivityArgs),
    /// Write amplitude, phase and single-component reconstructions of an image.
    Inspect(inspect::InspectArgs),
    /// Run the paired connectivity experiment over a lambda1 x lambda2 grid.
    Sweep(sweep::SweepArgs),
}

/// A command failure and the stage it happened in.
#[derive(Debug)]
pub enum Failure {
    /// Rejected before any output was written.
    Config(anyhow::Error),
    /// Failed while producing outputs.
    Run(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Run(_) => EXIT_FAILURES,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(e) => write!(f, "configuration error: {e:#}"),
            Failure::Run(e) => write!(f, "{e:#}"),
        }
    }
}

pub(crate) fn config_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Config(e.into())
}

pub(crate) fn run_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Run(e.into())
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Augment(args) => augment::run(&args),
        Command::Connectivity(args) => connectivity::run(&args).map(|()| EXIT_OK),
        Command::Inspect(args) => inspect::run(&args).map(|()| EXIT_OK),
        Command::Sweep(args) => sweep::run(&args).map(|()| EXIT_OK),
    };
    match result {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {failure}");
            failure.exit_code()
        }
    }
}

/// Bounded rayon pool for `workers` threads.
pub(crate) fn worker_pool(workers: usize) -> Result<rayon::ThreadPool, Failure> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(config_err)
}
