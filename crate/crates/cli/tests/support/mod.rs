#![allow(dead_code)]

use std::path::PathBuf;

use opdisc_cli::{run, Command, RunConfig, RunOutput};
use serde_json::Value;

pub const BUNDLED: [&str; 3] = [
    "bitflip-phaseflip.json",
    "three-pauli.json",
    "identity-vs-x.json",
];

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/data")
        .join(name)
}

pub fn schema() -> Value {
    let text = include_str!("../../schema/report.schema.json");
    serde_json::from_str(text).expect("schema is valid JSON")
}

pub fn validator() -> jsonschema::Validator {
    jsonschema::draft202012::new(&schema()).expect("schema compiles")
}

/// Schema violations as readable strings; empty when valid.
pub fn violations(v: &jsonschema::Validator, doc: &Value) -> Vec<String> {
    v.iter_errors(doc)
        .map(|e| format!("{} at {}", e, e.instance_path))
        .collect()
}

pub fn machine(path: impl Into<PathBuf>, command: Command) -> (RunOutput, Value) {
    let out = run(&RunConfig::new(path, command).machine());
    let doc: Value = serde_json::from_str(&out.stdout)
        .unwrap_or_else(|e| panic!("stdout is not one JSON document ({e}):\n{}", out.stdout));
    (out, doc)
}

pub fn all_commands() -> Vec<Command> {
    vec![
        Command::CheckSingle,
        Command::CheckMulti,
        Command::Strategy { probe: None },
        Command::Evaluate,
        Command::Simulate {
            truth: "1".into(),
            trials: 2_000,
            seed: 7,
        },
        Command::Scan {
            samples: 50,
            seed: 7,
        },
    ]
}
