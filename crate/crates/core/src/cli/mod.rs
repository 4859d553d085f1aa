//! Configuration-driven runs that write plot-ready CSV and JSON files.
//!
//! Exit codes: 0 success, 1 I/O or other failure, 2 configuration error,
//! 3 domain failure, 4 empty target.

mod commands;
mod config;
mod expr;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use commands::{
    cmd_decompose, cmd_eval, cmd_spectrum, eval_keig, DecomposeOutcome, DecompositionReport, EvalOutcome,
    EvalSummary, ScalingRow, SelfCheck, SpectrumOutcome, SpectrumSummary, TermReport, WedgeSummary,
};
pub use config::{EigenSpec, GridSpec, LatticeSpec, RunConfig, SpectrumSpec, SweepSpec, SystemSpec, WedgeSpec};
pub use expr::{Expr, ExprError, Term};
pub use output::{num, read_csv, write_atomic, Csv};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain failure: {0}")]
    Domain(String),
    #[error("target vanishes on the grid")]
    EmptyTarget,
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Domain(_) => 3,
            CliError::EmptyTarget => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "keigs", version, about = "Koopman eigenfunctions from data on transverse manifolds")]
pub struct Cli {
    /// Run configuration (TOML, or JSON by extension).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, overrides `output_dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Integrator tolerance, overrides `integrator_tol`.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for the parallel parts.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Run the spectrum demonstration with default settings.
    #[arg(long)]
    pub spectrum_demo: bool,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Evaluate one eigenfunction on a lattice.
    Eval,
    /// Greedy eigenfunction decomposition of a target.
    Decompose,
    /// Approximate-eigenvalue residual scaling and the wedge check.
    Spectrum,
}

/// Loads the configuration and applies command-line overrides.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_path(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.output_dir = Some(out.clone());
    }
    if let Some(tol) = cli.tol {
        if !(tol > 0.0) {
            return Err(CliError::Config(format!("--tol must be positive, got {tol}")));
        }
        cfg.integrator_tol = Some(tol);
    }
    if let Some(seed) = cli.seed {
        cfg.seed = Some(seed);
    }
    Ok(cfg)
}

/// Runs the selected command and returns the files it wrote.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    if let Some(threads) = cli.threads {
        // a pool may already exist when called twice in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let cfg = resolve_config(cli)?;
    let command = match (cli.command, cli.spectrum_demo) {
        (Some(c), _) => c,
        (None, true) => Command::Spectrum,
        (None, false) => {
            return Err(CliError::Config(
                "no command given (eval, decompose, spectrum or --spectrum-demo)".into(),
            ))
        }
    };
    match command {
        Command::Eval => cmd_eval(&cfg).map(|o| o.files),
        Command::Decompose => cmd_decompose(&cfg).map(|o| o.files),
        Command::Spectrum => cmd_spectrum(&cfg).map(|o| o.files),
    }
}

/// Entry point of the `keigs` binary.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("keigs: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
