//! Serializable reports. Channel indices are 1-based here, unlike the library.

use std::fmt::Write as _;

use opdisc::discrimination::{ContainmentCheck, Mode, ScanReport};
use opdisc::io::StrategyExport;
use opdisc::states::{plan_outcome_probabilities, VerdictCounts, VerdictSummary};
use opdisc::{ChannelSet, Error, FeasibilityReport, Strategy};
use serde::Serialize;

use crate::{ExitStatus, PATTERN_TABLE_MAX_USES};

#[derive(Debug, Clone, Serialize)]
pub struct Header {
    pub command: String,
    pub status: &'static str,
    pub exit_code: u8,
}

impl Header {
    fn new(command: &str, status: ExitStatus) -> Self {
        Self {
            command: command.to_string(),
            status: status.label(),
            exit_code: status.code(),
        }
    }

    fn exit_status(&self) -> ExitStatus {
        match self.exit_code {
            0 => ExitStatus::Feasible,
            1 => ExitStatus::Infeasible,
            _ => ExitStatus::InputError,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChannelRef {
    pub index: usize,
    pub name: String,
}

fn channel_refs(names: &[String]) -> Vec<ChannelRef> {
    names
        .iter()
        .enumerate()
        .map(|(i, n)| ChannelRef {
            index: i + 1,
            name: n.clone(),
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckEntry {
    pub channel: usize,
    pub name: String,
    pub against: Vec<usize>,
    pub contained: bool,
    pub max_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChannelVerdict {
    pub index: usize,
    pub name: String,
    pub distinguishable: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Feasibility {
    pub mode: Mode,
    pub overall: bool,
    pub per_channel: Vec<ChannelVerdict>,
    pub checks: Vec<CheckEntry>,
    pub witnesses: Vec<CheckEntry>,
}

impl Feasibility {
    fn new(names: &[String], r: &FeasibilityReport) -> Self {
        let entry = |c: &ContainmentCheck| CheckEntry {
            channel: c.channel + 1,
            name: names[c.channel].clone(),
            against: c.against.iter().map(|j| j + 1).collect(),
            contained: c.contained,
            max_residual: c.max_residual,
        };
        Self {
            mode: r.mode,
            overall: r.overall,
            per_channel: r
                .per_channel
                .iter()
                .enumerate()
                .map(|(i, &ok)| ChannelVerdict {
                    index: i + 1,
                    name: names[i].clone(),
                    distinguishable: ok,
                })
                .collect(),
            checks: r.checks.iter().map(entry).collect(),
            witnesses: r.witnesses.iter().map(entry).collect(),
        }
    }

    fn status(&self) -> ExitStatus {
        if self.overall {
            ExitStatus::Feasible
        } else {
            ExitStatus::Infeasible
        }
    }

    fn render(&self, out: &mut String) {
        let mode = match self.mode {
            Mode::SingleUse => "single use (with ancilla)",
            Mode::MultiUse => "multiple uses",
        };
        for v in &self.per_channel {
            let residual = self
                .checks
                .iter()
                .filter(|c| c.channel == v.index)
                .map(|c| c.max_residual)
                .fold(f64::INFINITY, f64::min);
            let _ = writeln!(
                out,
                "  [{}] {:<16} {:<18} min residual {:.3e}",
                v.index,
                v.name,
                if v.distinguishable {
                    "distinguishable"
                } else {
                    "NOT distinguishable"
                },
                residual
            );
        }
        if self.overall {
            let _ = writeln!(out, "verdict: unambiguously discriminable with {mode}");
        } else {
            let _ = writeln!(out, "verdict: NOT unambiguously discriminable with {mode}");
            for w in &self.witnesses {
                let _ = writeln!(
                    out,
                    "  witness: supp(channel {} `{}`) lies in the support of {{{}}} (residual {:.3e})",
                    w.channel,
                    w.name,
                    join(&w.against),
                    w.max_residual
                );
            }
        }
    }
}

fn join(xs: &[usize]) -> String {
    xs.iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    #[serde(flatten)]
    pub header: Header,
    pub dimension: usize,
    pub channels: Vec<ChannelRef>,
    #[serde(flatten)]
    pub feasibility: Feasibility,
}

impl CheckReport {
    pub fn new(command: &str, set: &ChannelSet, r: &FeasibilityReport) -> Self {
        let names = set.names();
        let feasibility = Feasibility::new(&names, r);
        Self {
            header: Header::new(command, feasibility.status()),
            dimension: set.dim(),
            channels: channel_refs(&names),
            feasibility,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ChannelSummary {
    pub index: usize,
    pub name: String,
    pub success: f64,
    pub error: f64,
    pub inconclusive: f64,
}

fn summaries(s: &Strategy) -> Vec<ChannelSummary> {
    opdisc::evaluate_strategy(s)
        .into_iter()
        .zip(s.channel_names())
        .enumerate()
        .map(|(i, (v, name))| ChannelSummary {
            index: i + 1,
            name: name.clone(),
            success: v.success,
            error: v.error,
            inconclusive: v.inconclusive,
        })
        .collect()
}

fn render_summaries(rows: &[ChannelSummary], out: &mut String) {
    let _ = writeln!(
        out,
        "  {:<22} {:>10} {:>10} {:>13}",
        "true channel", "success", "error", "inconclusive"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "  [{}] {:<18} {:>10.6} {:>10.3e} {:>13.6}",
            r.index, r.name, r.success, r.error, r.inconclusive
        );
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StrategyReport {
    #[serde(flatten)]
    pub header: Header,
    pub channels: Vec<ChannelRef>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uses: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub evaluation: Vec<ChannelSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategy: Option<StrategyExport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feasibility: Option<Feasibility>,
}

impl StrategyReport {
    pub fn feasible(s: &Strategy) -> Self {
        Self {
            header: Header::new("strategy", ExitStatus::Feasible),
            channels: channel_refs(s.channel_names()),
            uses: Some(s.uses()),
            evaluation: summaries(s),
            strategy: Some(StrategyExport::from_strategy(s)),
            feasibility: None,
        }
    }

    pub fn infeasible(set: &ChannelSet, r: &FeasibilityReport) -> Self {
        let names = set.names();
        Self {
            header: Header::new("strategy", ExitStatus::Infeasible),
            channels: channel_refs(&names),
            uses: None,
            evaluation: Vec::new(),
            strategy: None,
            feasibility: Some(Feasibility::new(&names, r)),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PatternRow {
    /// One letter per use, `P` (support) or `Q` (kernel).
    pub pattern: String,
    pub probability: f64,
    /// 1-based channel named by the pattern; absent when inconclusive.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChannelEvaluation {
    #[serde(flatten)]
    pub summary: ChannelSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub patterns: Option<Vec<PatternRow>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvaluateReport {
    #[serde(flatten)]
    pub header: Header,
    pub channels: Vec<ChannelRef>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uses: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub evaluation: Vec<ChannelEvaluation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feasibility: Option<Feasibility>,
}

impl EvaluateReport {
    pub fn feasible(s: &Strategy) -> Result<Self, Error> {
        let tables = s.uses() <= PATTERN_TABLE_MAX_USES;
        let evaluation = summaries(s)
            .into_iter()
            .zip(s.per_use_outputs())
            .map(|(summary, truth)| {
                let patterns = if tables {
                    let dist = plan_outcome_probabilities(s.plan(), truth, None)?;
                    Some(
                        dist.patterns
                            .into_iter()
                            .map(|p| PatternRow {
                                pattern: p.pattern.iter().map(ToString::to_string).collect(),
                                probability: p.probability,
                                verdict: p.conclusive.map(|i| i + 1),
                            })
                            .collect(),
                    )
                } else {
                    None
                };
                Ok(ChannelEvaluation { summary, patterns })
            })
            .collect::<Result<Vec<_>, Error>>()?;
        Ok(Self {
            header: Header::new("evaluate", ExitStatus::Feasible),
            channels: channel_refs(s.channel_names()),
            uses: Some(s.uses()),
            evaluation,
            feasibility: None,
        })
    }

    pub fn infeasible(set: &ChannelSet, r: &FeasibilityReport) -> Self {
        let names = set.names();
        Self {
            header: Header::new("evaluate", ExitStatus::Infeasible),
            channels: channel_refs(&names),
            uses: None,
            evaluation: Vec::new(),
            feasibility: Some(Feasibility::new(&names, r)),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CountRow {
    pub index: usize,
    pub name: String,
    pub count: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Counts {
    pub conclusive: Vec<CountRow>,
    pub inconclusive: u64,
    pub wrong_conclusive: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateReport {
    #[serde(flatten)]
    pub header: Header,
    pub channels: Vec<ChannelRef>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truth: Option<ChannelRef>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts: Option<Counts>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<VerdictSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimated_success: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feasibility: Option<Feasibility>,
}

impl SimulateReport {
    pub fn feasible(
        s: &Strategy,
        truth: usize,
        seed: u64,
        exact: VerdictSummary,
        counts: &VerdictCounts,
    ) -> Self {
        let names = s.channel_names();
        Self {
            header: Header::new("simulate", ExitStatus::Feasible),
            channels: channel_refs(names),
            truth: Some(ChannelRef {
                index: truth + 1,
                name: names[truth].clone(),
            }),
            trials: Some(counts.trials),
            seed: Some(seed),
            counts: Some(Counts {
                conclusive: counts
                    .conclusive
                    .iter()
                    .enumerate()
                    .map(|(i, &count)| CountRow {
                        index: i + 1,
                        name: names[i].clone(),
                        count,
                    })
                    .collect(),
                inconclusive: counts.inconclusive,
                wrong_conclusive: counts.wrong_conclusive(truth),
            }),
            exact: Some(exact),
            estimated_success: Some(counts.conclusive[truth] as f64 / counts.trials as f64),
            feasibility: None,
        }
    }

    pub fn infeasible(set: &ChannelSet, r: &FeasibilityReport) -> Self {
        let names = set.names();
        Self {
            header: Header::new("simulate", ExitStatus::Infeasible),
            channels: channel_refs(&names),
            truth: None,
            trials: None,
            seed: None,
            counts: None,
            exact: None,
            estimated_success: None,
            feasibility: Some(Feasibility::new(&names, r)),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanOutput {
    #[serde(flatten)]
    pub header: Header,
    pub channels: Vec<ChannelRef>,
    pub samples: usize,
    pub seed: u64,
    #[serde(flatten)]
    pub scan: ScanReport,
    pub summary: String,
}

impl ScanOutput {
    /// A found witness input means ancilla-free discrimination is possible.
    pub fn new(set: &ChannelSet, samples: usize, seed: u64, scan: ScanReport) -> Self {
        let status = if scan.any_input_found {
            ExitStatus::Feasible
        } else {
            ExitStatus::Infeasible
        };
        Self {
            header: Header::new("scan", status),
            channels: channel_refs(&set.names()),
            samples,
            seed,
            summary: scan.summary(),
            scan,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    #[serde(flatten)]
    pub header: Header,
    pub error: String,
}

impl ErrorReport {
    pub fn new(command: &str, e: &Error) -> Self {
        Self {
            header: Header::new(command, ExitStatus::InputError),
            error: e.to_string(),
        }
    }
}

/// Everything a single invocation can print.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Report {
    Check(CheckReport),
    Strategy(StrategyReport),
    Evaluate(EvaluateReport),
    Simulate(SimulateReport),
    Scan(ScanOutput),
    Error(ErrorReport),
}

impl Report {
    fn header(&self) -> &Header {
        match self {
            Report::Check(r) => &r.header,
            Report::Strategy(r) => &r.header,
            Report::Evaluate(r) => &r.header,
            Report::Simulate(r) => &r.header,
            Report::Scan(r) => &r.header,
            Report::Error(r) => &r.header,
        }
    }

    pub fn status(&self) -> ExitStatus {
        self.header().exit_status()
    }

    pub fn render_human(&self) -> String {
        let mut out = String::new();
        let names = |chs: &[ChannelRef]| {
            chs.iter()
                .map(|c| format!("{}:{}", c.index, c.name))
                .collect::<Vec<_>>()
                .join(" ")
        };
        match self {
            Report::Check(r) => {
                let _ = writeln!(
                    out,
                    "{}: {} channels on C^{} [{}]",
                    r.header.command,
                    r.channels.len(),
                    r.dimension,
                    names(&r.channels)
                );
                r.feasibility.render(&mut out);
            }
            Report::Strategy(r) => {
                let _ = writeln!(out, "strategy: [{}]", names(&r.channels));
                match (&r.strategy, &r.feasibility) {
                    (Some(s), _) => {
                        let _ = writeln!(
                            out,
                            "  {} uses, probe Schmidt coefficients {:?}",
                            s.uses, s.schmidt_coeffs
                        );
                        let _ = writeln!(
                            out,
                            "  per-use measurement: P_i = projector onto supp(output i), Q_i = I - P_i"
                        );
                        render_summaries(&r.evaluation, &mut out);
                        let _ = writeln!(out, "  (use --machine for the full-precision export)");
                    }
                    (None, Some(f)) => f.render(&mut out),
                    (None, None) => {}
                }
            }
            Report::Evaluate(r) => {
                let _ = writeln!(out, "evaluate: [{}]", names(&r.channels));
                if let Some(f) = &r.feasibility {
                    f.render(&mut out);
                } else {
                    let _ = writeln!(out, "  {} uses", r.uses.unwrap_or(0));
                    let rows: Vec<ChannelSummary> =
                        r.evaluation.iter().map(|e| e.summary.clone()).collect();
                    render_summaries(&rows, &mut out);
                }
            }
            Report::Simulate(r) => {
                let _ = writeln!(out, "simulate: [{}]", names(&r.channels));
                if let Some(f) = &r.feasibility {
                    f.render(&mut out);
                } else if let (Some(truth), Some(counts), Some(exact)) =
                    (&r.truth, &r.counts, &r.exact)
                {
                    let trials = r.trials.unwrap_or(0);
                    let _ = writeln!(
                        out,
                        "  truth [{}] {}, {} trials, seed {}",
                        truth.index,
                        truth.name,
                        trials,
                        r.seed.unwrap_or(0)
                    );
                    for c in &counts.conclusive {
                        let _ =
                            writeln!(out, "  conclusive [{}] {:<16} {}", c.index, c.name, c.count);
                    }
                    let _ = writeln!(out, "  inconclusive          {}", counts.inconclusive);
                    let _ = writeln!(out, "  wrong conclusive      {}", counts.wrong_conclusive);
                    let _ = writeln!(
                        out,
                        "  success: estimated {:.6}, exact {:.6}",
                        r.estimated_success.unwrap_or(0.0),
                        exact.success
                    );
                }
            }
            Report::Scan(r) => {
                let _ = writeln!(
                    out,
                    "scan: [{}], {} samples, seed {}",
                    names(&r.channels),
                    r.samples,
                    r.seed
                );
                let _ = writeln!(out, "  {}", r.summary);
                if let Some(w) = &r.scan.first_witness {
                    let _ = writeln!(out, "  first witness input: {w:?}");
                }
            }
            Report::Error(r) => {
                let _ = writeln!(out, "{}: failed", r.header.command);
            }
        }
        out
    }
}
