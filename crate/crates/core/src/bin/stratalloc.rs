use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use stratalloc::cli::{self, CommandOutput, EvaluateOptions};
use stratalloc::{Paradigm, Result};

/// Minimax-regret sample allocation for stratified experiments.
#[derive(Debug, Parser)]
#[command(name = "stratalloc", version)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Allocate the budget and report the worst-case regret of each paradigm.
    Allocate {
        /// Scenario file (JSON). Defaults to the built-in vaccine-trial scenario.
        #[arg(long)]
        config: Option<PathBuf>,
        /// minimax, proportional, egalitarian, neyman, single:<g>, a comma list, or all.
        #[arg(long, default_value = "minimax")]
        scheme: String,
        /// Also write the table as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form (and optionally simulated) regret under the observed rates.
    Evaluate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "all")]
        scheme: String,
        /// separate, joint or egalitarian; all three when omitted.
        #[arg(long)]
        paradigm: Option<Paradigm>,
        /// Monte Carlo replications.
        #[arg(long)]
        reps: Option<u64>,
        #[arg(long, default_value_t = cli::DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write every case-study table into a directory.
    Reproduce {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        reps: Option<u64>,
        #[arg(long, default_value_t = cli::DEFAULT_SEED)]
        seed: u64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample size needed to detect the configured effect.
    Power {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(output: &CommandOutput, csv: Option<&Path>) -> Result<()> {
    for w in &output.warnings {
        eprintln!("warning: {w}");
    }
    let mut stdout = std::io::stdout().lock();
    for t in &output.tables {
        // A closed pipe is not worth an error.
        let _ = writeln!(stdout, "{t}");
    }
    if let (Some(path), Some(table)) = (csv, output.tables.first()) {
        table.write_csv(path)?;
    }
    Ok(())
}

fn run(args: Args) -> Result<()> {
    match args.command {
        Command::Allocate {
            config,
            scheme,
            out,
        } => emit(
            &cli::cmd_allocate(config.as_deref(), &scheme)?,
            out.as_deref(),
        ),
        Command::Evaluate {
            config,
            scheme,
            paradigm,
            reps,
            seed,
            out,
        } => {
            let opts = EvaluateOptions {
                schemes: scheme,
                paradigm,
                reps,
                seed,
            };
            emit(
                &cli::cmd_evaluate(config.as_deref(), &opts)?,
                out.as_deref(),
            )
        }
        Command::Reproduce {
            config,
            reps,
            seed,
            out,
        } => {
            let (output, written) = cli::cmd_reproduce(&out, config.as_deref(), reps, seed)?;
            emit(&output, None)?;
            for p in written {
                eprintln!("wrote {}", p.display());
            }
            Ok(())
        }
        Command::Power { config, out } => emit(&cli::cmd_power(config.as_deref())?, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e))
        }
    }
}
