//! JSON documents: channel-set input files and strategy exports.
//!
//! A matrix is an array of rows, each row an array of `[re, im]` pairs.
//! Floats are written in shortest round-trip form, so a parsed export
//! reproduces the exact `f64` values that were written.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::channels::{ChannelSet, KrausChannel};
use crate::discrimination::Strategy;
use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, Tolerance};
use crate::states::{make_probe, CopyMeasurement, DensityMatrix, MeasurementPlan};

pub type EntryRows = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSetFile {
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<Tolerance>,
    pub channels: Vec<ChannelEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelEntry {
    pub name: String,
    pub kraus: Vec<EntryRows>,
}

impl ChannelSetFile {
    pub fn from_set(set: &ChannelSet) -> Self {
        Self {
            dimension: set.dim(),
            tolerance: Some(*set.tol()),
            channels: set
                .channels()
                .iter()
                .map(|ch| ChannelEntry {
                    name: ch.name().to_string(),
                    kraus: ch
                        .kraus()
                        .iter()
                        .map(ComplexMatrix::to_entry_rows)
                        .collect(),
                })
                .collect(),
        }
    }

    /// Validates shapes, names and completeness; `tol_override` wins over the
    /// file-level tolerance.
    pub fn into_set(self, tol_override: Option<Tolerance>) -> Result<ChannelSet> {
        let tol = tol_override.or(self.tolerance).unwrap_or_default();
        tol.check()?;
        let d = self.dimension;
        if d == 0 {
            return Err(Error::Parse("dimension must be positive".into()));
        }
        let mut seen = HashSet::new();
        let mut channels = Vec::with_capacity(self.channels.len());
        for (ci, entry) in self.channels.into_iter().enumerate() {
            let label = format!("channel {} (`{}`)", ci + 1, entry.name);
            if !seen.insert(entry.name.clone()) {
                return Err(Error::Parse(format!("{label}: duplicate channel name")));
            }
            if entry.kraus.is_empty() {
                return Err(Error::Parse(format!("{label}: empty Kraus list")));
            }
            let mut kraus = Vec::with_capacity(entry.kraus.len());
            for (mi, rows) in entry.kraus.iter().enumerate() {
                let where_ = format!("{label}, Kraus matrix {}", mi + 1);
                if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                    return Err(Error::Parse(format!("{where_}: expected {d}x{d} entries")));
                }
                let m = ComplexMatrix::from_entry_rows(rows)
                    .map_err(|e| Error::Parse(format!("{where_}: {e}")))?;
                kraus.push(m);
            }
            let ch = KrausChannel::new(entry.name, kraus, &tol)
                .map_err(|e| Error::Parse(format!("{label}: {e}")))?;
            channels.push(ch);
        }
        ChannelSet::new(channels, tol)
    }
}

pub fn parse_channel_set(text: &str, tol_override: Option<Tolerance>) -> Result<ChannelSet> {
    let file: ChannelSetFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.into_set(tol_override)
}

pub fn channel_set_to_json(set: &ChannelSet) -> String {
    serde_json::to_string_pretty(&ChannelSetFile::from_set(set)).expect("finite floats serialize")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanCopyExport {
    #[serde(rename = "P")]
    pub support: EntryRows,
    #[serde(rename = "Q")]
    pub kernel: EntryRows,
}

/// Full-precision serialization of a [`Strategy`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrategyExport {
    pub kind: String,
    pub uses: usize,
    pub channels: Vec<String>,
    pub main_dim: usize,
    pub schmidt_coeffs: Vec<f64>,
    pub per_use_outputs: Vec<EntryRows>,
    pub plan: Vec<PlanCopyExport>,
}

pub const STRATEGY_KIND: &str = "strategy";

impl StrategyExport {
    pub fn from_strategy(s: &Strategy) -> Self {
        Self {
            kind: STRATEGY_KIND.to_string(),
            uses: s.uses(),
            channels: s.channel_names().to_vec(),
            main_dim: s.probe().main_dim(),
            schmidt_coeffs: s.probe().schmidt_coeffs().to_vec(),
            per_use_outputs: s
                .per_use_outputs()
                .iter()
                .map(|r| r.matrix().to_entry_rows())
                .collect(),
            plan: s
                .plan()
                .per_copy()
                .iter()
                .map(|m| PlanCopyExport {
                    support: m.support.to_entry_rows(),
                    kernel: m.kernel.to_entry_rows(),
                })
                .collect(),
        }
    }

    pub fn into_strategy(self) -> Result<Strategy> {
        if self.kind != STRATEGY_KIND {
            return Err(Error::Parse(format!(
                "unexpected document kind `{}`",
                self.kind
            )));
        }
        if self.uses != self.channels.len() {
            return Err(Error::Parse(format!(
                "uses = {} but {} channels listed",
                self.uses,
                self.channels.len()
            )));
        }
        let probe = make_probe(self.main_dim, Some(&self.schmidt_coeffs))?;
        let outputs = self
            .per_use_outputs
            .iter()
            .enumerate()
            .map(|(i, rows)| {
                ComplexMatrix::from_entry_rows(rows)
                    .and_then(DensityMatrix::new)
                    .map_err(|e| Error::Parse(format!("output state {}: {e}", i + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        let per_copy = self
            .plan
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let parse = |rows: &EntryRows| {
                    ComplexMatrix::from_entry_rows(rows)
                        .map_err(|e| Error::Parse(format!("plan copy {}: {e}", i + 1)))
                };
                Ok(CopyMeasurement {
                    support: parse(&c.support)?,
                    kernel: parse(&c.kernel)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let plan = MeasurementPlan::from_projectors(per_copy)?;
        Strategy::from_parts(self.channels, probe, outputs, plan)
    }
}

/// Any input document the command-line tool accepts.
#[derive(Debug, Clone)]
pub enum Document {
    ChannelSet(ChannelSet),
    Strategy(Strategy),
}

/// Parses a channel-set file or a strategy export. A strategy may be given
/// bare (`"kind": "strategy"`) or nested under a top-level `"strategy"` key.
pub fn parse_document(text: &str, tol_override: Option<Tolerance>) -> Result<Document> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let strategy = match &value {
        Value::Object(map) if map.get("kind").and_then(Value::as_str) == Some(STRATEGY_KIND) => {
            Some(value.clone())
        }
        Value::Object(map) if map.get("strategy").is_some_and(Value::is_object) => {
            map.get("strategy").cloned()
        }
        _ => None,
    };
    match strategy {
        Some(v) => {
            let export: StrategyExport =
                serde_json::from_value(v).map_err(|e| Error::Parse(e.to_string()))?;
            export.into_strategy().map(Document::Strategy)
        }
        None => {
            let file: ChannelSetFile =
                serde_json::from_value(value).map_err(|e| Error::Parse(e.to_string()))?;
            file.into_set(tol_override).map(Document::ChannelSet)
        }
    }
}

pub fn read_document(path: &Path, tol_override: Option<Tolerance>) -> Result<Document> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_document(&text, tol_override)
}

#[derive(Debug, Clone, Copy)]
pub struct BundledExample {
    pub file_name: &'static str,
    pub contents: &'static str,
}

/// Channel-set files shipped with the library.
pub fn bundled_examples() -> [BundledExample; 3] {
    [
        BundledExample {
            file_name: "bitflip-phaseflip.json",
            contents: include_str!("../data/bitflip-phaseflip.json"),
        },
        BundledExample {
            file_name: "three-pauli.json",
            contents: include_str!("../data/three-pauli.json"),
        },
        BundledExample {
            file_name: "identity-vs-x.json",
            contents: include_str!("../data/identity-vs-x.json"),
        },
    ]
}
