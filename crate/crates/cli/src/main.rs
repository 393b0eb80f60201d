//! `hjdecay`: runs solves, spectra, verification and the profile tools, and
//! writes CSV/JSON artifacts.
//!
//! Exit codes: 0 success, 1 run or acceptance failure, 2 usage or validation
//! error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hjdecay::HjError;

use config::{DtSetting, Oracle};

#[derive(Debug, Parser)]
#[command(name = "hjdecay", version, about = "Viscous Hamilton-Jacobi decay experiments on an interval")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Flat key-value config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (else HJDECAY_OUT, else the config, else ./hjdecay-out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// File name stem for the artifacts.
    #[arg(long, global = true)]
    name: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// March one problem and write its trajectory and report.
    Solve(SolveArgs),
    /// Robin eigenvalues and r1(a), or an r1 sweep.
    Spectrum(SpectrumArgs),
    /// Run the acceptance criteria and write a summary.
    Verify(VerifyArgs),
    /// Profiled rearrangement of an initial datum.
    Rearrange(RearrangeArgs),
    /// Stationary profile for a = 1, p in (0, 1).
    Stationary(StationaryArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    p: Option<f64>,
    /// e1, bump, plateau, asym, or an x,value CSV file.
    #[arg(long)]
    u0: Option<String>,
    #[arg(long)]
    n_cells: Option<usize>,
    #[arg(long)]
    t_end: Option<f64>,
    /// "auto" or a fixed step.
    #[arg(long)]
    dt: Option<DtSetting>,
    #[arg(long)]
    record_every: Option<usize>,
    #[arg(long)]
    extinction_floor: Option<f64>,
    /// Times at which to write full fields.
    #[arg(long, value_delimiter = ',')]
    snapshots: Option<Vec<f64>>,
    /// Compare against an exact solution at every record.
    #[arg(long, value_enum)]
    oracle: Option<Oracle>,
    #[arg(long)]
    fit_from: Option<f64>,
    #[arg(long)]
    fit_to: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    #[arg(long)]
    modes: Option<usize>,
    /// Write the r1(a) curve instead of one spectrum.
    #[arg(long)]
    sweep: bool,
    #[arg(long, allow_hyphen_values = true)]
    a_from: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    a_to: Option<f64>,
    #[arg(long)]
    a_steps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Criterion ids to run (all when absent).
    #[arg(long, value_delimiter = ',')]
    only: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct RearrangeArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    u0: Option<String>,
    #[arg(long)]
    n_cells: Option<usize>,
}

#[derive(Debug, Args)]
pub struct StationaryArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    n_dim: Option<usize>,
    /// Cells on the radius [0, 1].
    #[arg(long)]
    n_cells: Option<usize>,
    /// Also march the one-dimensional profile to this time and report drift.
    #[arg(long)]
    t_end: Option<f64>,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or parameters: exit 2.
    Usage(String),
    /// The run itself failed, or a criterion did: exit 1.
    Failed(String),
}

impl CliError {
    fn invalid(e: HjError) -> Self {
        Self::Usage(e.to_string())
    }

    fn io(e: std::io::Error) -> Self {
        Self::Failed(format!("i/o error: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => commands::solve(a),
        Command::Spectrum(a) => commands::spectrum(a),
        Command::Verify(a) => commands::verify(a),
        Command::Rearrange(a) => commands::rearrange(a),
        Command::Stationary(a) => commands::stationary(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
