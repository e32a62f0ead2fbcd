//! Command runner behind the `opdisc` binary.
//!
//! [`run`] never touches the process: it returns the exit status together
//! with the text destined for stdout and stderr, which keeps the binary a
//! thin shell and the whole contract testable in-process.

use std::path::PathBuf;

use opdisc::io::{read_document, Document};
use opdisc::{
    build_strategy, check_multi_use, check_single_use, evaluate_strategy,
    no_ancilla_single_use_scan, simulate_strategy, ChannelSet, Error, Strategy, Tolerance,
};

mod report;

pub use report::{
    ChannelRef, CheckReport, ErrorReport, EvaluateReport, Report, ScanOutput, SimulateReport,
    StrategyReport,
};

/// Above this many uses the evaluate report omits the per-pattern tables.
pub const PATTERN_TABLE_MAX_USES: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    CheckSingle,
    CheckMulti,
    Strategy {
        probe: Option<Vec<f64>>,
    },
    Evaluate,
    Simulate {
        truth: String,
        trials: u64,
        seed: u64,
    },
    Scan {
        samples: usize,
        seed: u64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::CheckSingle => "check-single",
            Command::CheckMulti => "check-multi",
            Command::Strategy { .. } => "strategy",
            Command::Evaluate => "evaluate",
            Command::Simulate { .. } => "simulate",
            Command::Scan { .. } => "scan",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputMode {
    #[default]
    Human,
    Machine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input_path: PathBuf,
    pub command: Command,
    pub tol_rel: Option<f64>,
    pub tol_abs: Option<f64>,
    pub output: OutputMode,
}

impl RunConfig {
    pub fn new(input_path: impl Into<PathBuf>, command: Command) -> Self {
        Self {
            input_path: input_path.into(),
            command,
            tol_rel: None,
            tol_abs: None,
            output: OutputMode::Human,
        }
    }

    pub fn machine(mut self) -> Self {
        self.output = OutputMode::Machine;
        self
    }
}

/// Process exit status; the numeric code is a function of the report alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Feasible,
    Infeasible,
    InputError,
}

impl ExitStatus {
    pub fn code(self) -> u8 {
        match self {
            ExitStatus::Feasible => 0,
            ExitStatus::Infeasible => 1,
            ExitStatus::InputError => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ExitStatus::Feasible => "feasible",
            ExitStatus::Infeasible => "infeasible",
            ExitStatus::InputError => "error",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub status: ExitStatus,
    pub stdout: String,
    pub stderr: String,
}

pub fn run(config: &RunConfig) -> RunOutput {
    let report = match execute(config) {
        Ok(r) => r,
        Err(e) => Report::Error(ErrorReport::new(config.command.name(), &e)),
    };
    let status = report.status();
    let stdout = match config.output {
        OutputMode::Machine => {
            let mut s = serde_json::to_string_pretty(&report).expect("reports hold finite floats");
            s.push('\n');
            s
        }
        OutputMode::Human => report.render_human(),
    };
    let stderr = match &report {
        Report::Error(e) => format!("error: {}\n", e.error),
        _ => String::new(),
    };
    RunOutput {
        status,
        stdout,
        stderr,
    }
}

fn execute(config: &RunConfig) -> Result<Report, Error> {
    let doc = load(config)?;
    let command = config.command.name();
    match &config.command {
        Command::CheckSingle => {
            let set = require_set(doc, command)?;
            Ok(Report::Check(CheckReport::new(
                command,
                &set,
                &check_single_use(&set),
            )))
        }
        Command::CheckMulti => {
            let set = require_set(doc, command)?;
            Ok(Report::Check(CheckReport::new(
                command,
                &set,
                &check_multi_use(&set),
            )))
        }
        Command::Strategy { probe } => {
            let set = require_set(doc, command)?;
            match build_strategy(&set, probe.as_deref()) {
                Ok(s) => Ok(Report::Strategy(StrategyReport::feasible(&s))),
                Err(Error::Infeasible { .. }) => Ok(Report::Strategy(StrategyReport::infeasible(
                    &set,
                    &check_multi_use(&set),
                ))),
                Err(e) => Err(e),
            }
        }
        Command::Evaluate => match doc {
            Document::Strategy(s) => Ok(Report::Evaluate(EvaluateReport::feasible(&s)?)),
            Document::ChannelSet(set) => match build_strategy(&set, None) {
                Ok(s) => Ok(Report::Evaluate(EvaluateReport::feasible(&s)?)),
                Err(Error::Infeasible { .. }) => Ok(Report::Evaluate(EvaluateReport::infeasible(
                    &set,
                    &check_multi_use(&set),
                ))),
                Err(e) => Err(e),
            },
        },
        Command::Simulate {
            truth,
            trials,
            seed,
        } => {
            let strategy = match doc {
                Document::Strategy(s) => s,
                Document::ChannelSet(set) => match build_strategy(&set, None) {
                    Ok(s) => s,
                    Err(Error::Infeasible { .. }) => {
                        return Ok(Report::Simulate(SimulateReport::infeasible(
                            &set,
                            &check_multi_use(&set),
                        )))
                    }
                    Err(e) => return Err(e),
                },
            };
            let index = resolve_truth(&strategy, truth)?;
            let counts = simulate_strategy(&strategy, index, *trials, *seed)?;
            let exact = evaluate_strategy(&strategy)[index];
            Ok(Report::Simulate(SimulateReport::feasible(
                &strategy, index, *seed, exact, &counts,
            )))
        }
        Command::Scan { samples, seed } => {
            let set = require_set(doc, command)?;
            let scan = no_ancilla_single_use_scan(&set, *samples, *seed)?;
            Ok(Report::Scan(ScanOutput::new(&set, *samples, *seed, scan)))
        }
    }
}

/// Reads the input; tolerance flags override the file's values field by field.
fn load(config: &RunConfig) -> Result<Document, Error> {
    for (flag, v) in [("--tol-rel", config.tol_rel), ("--tol-abs", config.tol_abs)] {
        if let Some(x) = v {
            if !(x.is_finite() && x >= 0.0) {
                return Err(Error::InvalidTolerance(format!("{flag} {x}")));
            }
        }
    }
    let doc = read_document(&config.input_path, None)?;
    if config.tol_rel.is_none() && config.tol_abs.is_none() {
        return Ok(doc);
    }
    match doc {
        Document::ChannelSet(set) => {
            let file_tol = *set.tol();
            let tol = Tolerance::new(
                config.tol_rel.unwrap_or(file_tol.rel),
                config.tol_abs.unwrap_or(file_tol.abs),
            )?;
            read_document(&config.input_path, Some(tol))
        }
        strategy => Ok(strategy),
    }
}

fn require_set(doc: Document, command: &str) -> Result<ChannelSet, Error> {
    match doc {
        Document::ChannelSet(set) => Ok(set),
        Document::Strategy(_) => Err(Error::Parse(format!(
            "`{command}` needs a channel-set file, got a strategy export"
        ))),
    }
}

/// `truth` is a 1-based index when it parses as an integer, otherwise a name.
fn resolve_truth(s: &Strategy, truth: &str) -> Result<usize, Error> {
    let names = s.channel_names();
    if let Ok(k) = truth.trim().parse::<usize>() {
        return if (1..=names.len()).contains(&k) {
            Ok(k - 1)
        } else {
            Err(Error::Parse(format!(
                "--truth {k}: expected an index in 1..={} or a channel name",
                names.len()
            )))
        };
    }
    names
        .iter()
        .position(|n| n == truth)
        .ok_or_else(|| Error::Parse(format!("--truth `{truth}`: no channel with that name")))
}
