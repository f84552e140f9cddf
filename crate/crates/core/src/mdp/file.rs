//! JSON model documents.
//!
//! ```json
//! {
//!   "states": 2,
//!   "actions": 2,
//!   "admissible": [[0, 1], [0]],
//!   "transitions": [{"x": 0, "a": 0, "x2": 1, "p": 1.0}, ...],
//!   "costs": [{"x": 0, "a": 0, "c": 1.0}, ...],
//!   "absorbing": [1]
//! }
//! ```
//!
//! Every admissible pair needs exactly one cost record and transition records
//! whose probabilities sum to one. `absorbing` is optional.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::FiniteMdp;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionRecord {
    pub x: usize,
    pub a: usize,
    pub x2: usize,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostRecord {
    pub x: usize,
    pub a: usize,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub states: usize,
    pub actions: usize,
    pub admissible: Vec<Vec<usize>>,
    pub transitions: Vec<TransitionRecord>,
    pub costs: Vec<CostRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub absorbing: Option<Vec<usize>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    states: usize,
    actions: usize,
    admissible: Vec<Vec<usize>>,
    transitions: Vec<Value>,
    costs: Vec<Value>,
    #[serde(default)]
    absorbing: Option<Vec<usize>>,
}

impl ModelFile {
    /// Parses a document without validating it. Record-level shape errors name
    /// the offending array index.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawModel =
            serde_json::from_str(text).map_err(|e| Error::MalformedModel(e.to_string()))?;
        let transitions = parse_records(raw.transitions, "transitions")?;
        let costs = parse_records(raw.costs, "costs")?;
        Ok(Self {
            states: raw.states,
            actions: raw.actions,
            admissible: raw.admissible,
            transitions,
            costs,
            absorbing: raw.absorbing,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model document serialises")
    }
}

fn parse_records<T: for<'de> Deserialize<'de>>(values: Vec<Value>, table: &str) -> Result<Vec<T>> {
    values
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            serde_json::from_value(v)
                .map_err(|e| Error::MalformedModel(format!("{table}[{i}]: {e}")))
        })
        .collect()
}

/// Parses and validates a model document.
pub fn parse_model(text: &str) -> Result<FiniteMdp> {
    FiniteMdp::from_file(&ModelFile::from_json(text)?)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<FiniteMdp> {
    parse_model(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CHAIN: &str = r#"{
        "states": 2, "actions": 1,
        "admissible": [[0], [0]],
        "transitions": [{"x": 0, "a": 0, "x2": 1, "p": 1.0},
                        {"x": 1, "a": 0, "x2": 1, "p": 1.0}],
        "costs": [{"x": 0, "a": 0, "c": 1}, {"x": 1, "a": 0, "c": 0}],
        "absorbing": [1]
    }"#;

    #[test]
    fn parses_and_round_trips() {
        let mdp = parse_model(CHAIN).unwrap();
        assert_eq!(mdp.state_count(), 2);
        assert_eq!(mdp.absorbing_states(), &[1]);
        let again = parse_model(&mdp.to_file().to_json()).unwrap();
        assert_eq!(again, mdp);
    }

    #[test]
    fn malformed_record_names_index() {
        let text = CHAIN.replace(
            r#"{"x": 1, "a": 0, "x2": 1, "p": 1.0}"#,
            r#"{"x": 1, "a": 0, "p": 1.0}"#,
        );
        let err = parse_model(&text).unwrap_err().to_string();
        assert!(err.contains("transitions[1]"), "{err}");
    }

    #[test]
    fn invalid_model_is_rejected() {
        let text = CHAIN.replace(r#""c": 1}"#, r#""c": -1}"#);
        let err = parse_model(&text).unwrap_err();
        assert!(matches!(err, Error::InvalidModel(_)));
        assert!(err.to_string().contains("negative"));
    }
}
