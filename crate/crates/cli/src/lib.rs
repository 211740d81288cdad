//! Command-line front end for scopeprobe campaigns.

pub mod commands;
pub mod config;
pub mod persist;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::{Context, Outcome};
use crate::config::CampaignConfig;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const WARNING: i32 = 2;
    pub const INVALID_INPUT: i32 = 3;
    pub const INTERNAL: i32 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("internal failure: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => exit::INVALID_INPUT,
            CliError::Internal(_) => exit::INTERNAL,
        }
    }
}

impl From<scopeprobe::Error> for CliError {
    fn from(e: scopeprobe::Error) -> Self {
        use scopeprobe::Error as E;
        match e {
            E::Diverged { .. } | E::NonFiniteInput => CliError::Internal(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "scopeprobe", version, about = "Frequency-amplitude stress testing of control loops")]
pub struct Cli {
    /// Campaign configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides `input.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides `workers`.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Overrides `output_dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Choose the number of periods per test from a maximal stress test.
    Calibrate,
    /// Bound amplitudes over the frequency range with sinusoidal probes.
    Bound,
    /// Generate the test set from the bounds.
    Generate,
    /// Execute the test set.
    Run,
    /// Evaluate the metamorphic relations and export plot tables.
    Analyze,
    /// All of the above in sequence.
    Campaign,
}

const DEFAULT_OUT: &str = "out";

/// Resolves flags against the configuration file.
pub fn context(cli: &Cli) -> Result<Context, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Invalid("--config is required".into()))?;
    let mut config = CampaignConfig::load(path)?;
    if let Some(seed) = cli.seed {
        config.input.seed = seed;
    }
    let workers = cli.workers.or(config.workers).unwrap_or(1);
    if workers == 0 {
        return Err(CliError::Invalid("--workers must be >= 1".into()));
    }
    let out = cli
        .out
        .clone()
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    Ok(Context {
        config,
        out,
        workers,
    })
}

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let ctx = context(cli)?;
    match cli.command {
        Command::Calibrate => commands::calibrate(&ctx),
        Command::Bound => commands::bound(&ctx),
        Command::Generate => commands::generate(&ctx),
        Command::Run => commands::run(&ctx),
        Command::Analyze => commands::analyze(&ctx),
        Command::Campaign => commands::campaign(&ctx),
    }
}

/// Runs the command and maps the outcome to an exit code. Warnings are
/// logged where they arise; errors are reported on stderr.
pub fn main_with(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(outcome) if outcome.warnings.is_empty() => exit::SUCCESS,
        Ok(outcome) => {
            eprintln!("finished with {} warning(s)", outcome.warnings.len());
            exit::WARNING
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
