//! `qembed`: batch front end for building and checking quantum embeddings
//! of classical linear stochastic systems.

mod commands;
mod model;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qembed_core::optical::NetlistFormat;

use crate::commands::{FeedbackArgs, SimulateArgs};
use crate::model::B3Choice;

/// Tolerance used when `QEMBED_TOL` is not set.
const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug)]
pub enum CliError {
    /// Bad input: unreadable or malformed file, inconsistent shapes, bad flag values.
    Usage(String),
    /// Well-formed input that fails a modelling requirement.
    Domain(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "qembed", version, about = "Quantum embeddings of classical linear stochastic systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the embedding preconditions of a model file.
    Validate { model: PathBuf },
    /// Build the quantum system and report realizability and transfer checks.
    Realize {
        model: PathBuf,
        #[arg(long, value_enum)]
        b3_strategy: Option<B3Choice>,
        /// Also write the quantum system JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit an optical network description of the realized system.
    Netlist {
        model: PathBuf,
        #[arg(long, value_enum)]
        b3_strategy: Option<B3Choice>,
        /// Auxiliary cavity coupling rate; once for all channels or once per channel.
        #[arg(long = "gamma")]
        gammas: Vec<f64>,
        #[arg(long, default_value = "json")]
        format: NetlistFormat,
    },
    /// Sample paths, moment flow and steady state of the embedding.
    Simulate {
        model: PathBuf,
        #[arg(long, value_enum)]
        b3_strategy: Option<B3Choice>,
        #[arg(long)]
        seed: Option<u64>,
        /// Number of paths for the ensemble covariance check.
        #[arg(long)]
        ensemble: Option<usize>,
        /// Write the paired sample paths here.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write the quantum moment flow here.
        #[arg(long)]
        moments_csv: Option<PathBuf>,
    },
    /// Cavity feedback loop: hybrid/quantum consistency and the conditional filter.
    Feedback {
        /// Optional model file whose `feedback` block supplies defaults.
        model: Option<PathBuf>,
        #[arg(long, allow_negative_numbers = true)]
        omega: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        gamma: Option<f64>,
        #[arg(long, default_value_t = 10.0)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        /// Write the filter covariance and gain trajectory here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn tolerance() -> Result<f64, CliError> {
    match std::env::var("QEMBED_TOL") {
        Err(_) => Ok(DEFAULT_TOL),
        Ok(v) => match v.trim().parse::<f64>() {
            Ok(t) if t.is_finite() && t > 0.0 => Ok(t),
            _ => Err(CliError::Usage(format!("QEMBED_TOL must be a positive number, got {v:?}"))),
        },
    }
}

fn run(cli: Cli) -> Result<commands::Outcome, CliError> {
    let tol = tolerance()?;
    match cli.command {
        Command::Validate { model } => commands::validate(&model),
        Command::Realize {
            model,
            b3_strategy,
            out,
        } => commands::realize(&model, b3_strategy, out.as_ref(), tol),
        Command::Netlist {
            model,
            b3_strategy,
            gammas,
            format,
        } => commands::netlist(&model, b3_strategy, &gammas, format, tol),
        Command::Simulate {
            model,
            b3_strategy,
            seed,
            ensemble,
            csv,
            moments_csv,
        } => commands::simulate(
            &model,
            &SimulateArgs {
                b3: b3_strategy,
                seed,
                ensemble,
                csv,
                moments_csv,
                tol,
            },
        ),
        Command::Feedback {
            model,
            omega,
            gamma,
            t_end,
            step,
            csv,
        } => commands::feedback(&FeedbackArgs {
            model,
            omega,
            gamma,
            t_end,
            step,
            csv,
            tol,
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            if outcome.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            let (CliError::Usage(msg) | CliError::Domain(msg)) = &e;
            eprintln!("error: {msg}");
            ExitCode::from(e.exit_code())
        }
    }
}
