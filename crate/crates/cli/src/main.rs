//! `fefkit`: build states, compute the fully entangled fraction, certify
//! maximal entanglement, evaluate the witness and simulate teleportation.
//!
//! Exit codes: 0 success, 1 invalid input, 2 optimizer did not converge
//! (report still written), 3 internal cross-check failed.

mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Inconsistent(_) => 3,
        }
    }
}

impl From<fef_core::Error> for CliError {
    fn from(e: fef_core::Error) -> Self {
        match e {
            fef_core::Error::Inconsistent(msg) => CliError::Inconsistent(msg),
            other => CliError::Input(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fefkit", version, about = "Fully entangled fraction toolkit for d'⊗d states")]
pub struct Cli {
    /// Seed for every random choice (restarts, Haar draws, Monte-Carlo inputs).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// fef: gradient tolerance; check: structural tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Write the state (make) or report (other commands) to this path.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Print the JSON report to stdout.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a state file.
    Make(MakeArgs),
    /// Fully entangled fraction and optimal teleportation fidelity.
    Fef {
        input: PathBuf,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long)]
        max_iters: Option<usize>,
    },
    /// Structural and variational maximal-entanglement certificates.
    Check { input: PathBuf },
    /// Witness expectation and the two thresholds.
    Witness {
        input: PathBuf,
        #[arg(long)]
        restarts: Option<usize>,
    },
    /// Closed-form and simulated teleportation fidelity with standard corrections.
    Teleport {
        input: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MakeKind {
    /// `|χ_m⟩⟨χ_m|` (--dprime, --d, --m).
    Chi,
    /// `Σ p_m (U†⊗I)|χ_m⟩⟨χ_m|(U⊗I)` with Haar `U` (--dprime, --d, --probs).
    CanonicalMixture,
    /// `p|χ₁⟩⟨χ₁| + (1−p)I/d²` (--d, --p).
    Isotropic,
    /// `|a⟩⟨a|⊗|b⟩⟨b|` with --a/--b, otherwise a random product state.
    Product,
    /// Random state of the given rank (--dprime, --d, --rank).
    Random,
    /// `Σ √w_i |i⟩|i⟩` with normalized weights (--dprime, --d, --weights).
    Schmidt,
}

#[derive(Debug, Args)]
pub struct MakeArgs {
    #[arg(value_enum)]
    pub kind: MakeKind,
    #[arg(long)]
    pub dprime: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub probs: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    pub p: Option<f64>,
    #[arg(long)]
    pub rank: Option<usize>,
    #[arg(long)]
    pub a: Option<usize>,
    #[arg(long)]
    pub b: Option<usize>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub weights: Option<Vec<f64>>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
