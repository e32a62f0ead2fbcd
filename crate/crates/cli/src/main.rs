use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use opdisc_cli::{run, Command, OutputMode, RunConfig};

/// Unambiguous discrimination of quantum channels given by Kraus operators.
#[derive(Debug, Parser)]
#[command(name = "opdisc", version)]
struct Cli {
    /// Emit a single JSON document instead of text.
    #[arg(long, global = true)]
    machine: bool,
    /// Relative rank tolerance (overrides the file).
    #[arg(long, global = true, value_name = "REL")]
    tol_rel: Option<f64>,
    /// Absolute rank tolerance (overrides the file).
    #[arg(long, global = true, value_name = "ABS")]
    tol_abs: Option<f64>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Single-use feasibility with an ancilla.
    CheckSingle { file: PathBuf },
    /// Multi-use feasibility (pairwise support non-containment).
    CheckMulti { file: PathBuf },
    /// Build the n-use strategy and export it.
    Strategy {
        file: PathBuf,
        /// Schmidt coefficients of the probe, comma separated.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        probe: Option<Vec<f64>>,
    },
    /// Exact success / error / inconclusive probabilities.
    Evaluate { file: PathBuf },
    /// Monte Carlo run of the strategy.
    Simulate {
        file: PathBuf,
        /// True channel: 1-based index or name.
        #[arg(long)]
        truth: String,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Random search for an ancilla-free single-use input.
    Scan {
        file: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (file, command) = match cli.command {
        Cmd::CheckSingle { file } => (file, Command::CheckSingle),
        Cmd::CheckMulti { file } => (file, Command::CheckMulti),
        Cmd::Strategy { file, probe } => (file, Command::Strategy { probe }),
        Cmd::Evaluate { file } => (file, Command::Evaluate),
        Cmd::Simulate {
            file,
            truth,
            trials,
            seed,
        } => (
            file,
            Command::Simulate {
                truth,
                trials,
                seed,
            },
        ),
        Cmd::Scan {
            file,
            samples,
            seed,
        } => (file, Command::Scan { samples, seed }),
    };
    let config = RunConfig {
        input_path: file,
        command,
        tol_rel: cli.tol_rel,
        tol_abs: cli.tol_abs,
        output: if cli.machine {
            OutputMode::Machine
        } else {
            OutputMode::Human
        },
    };
    let out = run(&config);
    // A closed pipe is not worth a panic.
    let _ = std::io::stdout().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().write_all(out.stderr.as_bytes());
    ExitCode::from(out.status.code())
}
