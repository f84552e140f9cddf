use thiserror::Error;

use crate::mdp::Violation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {}", format_violations(.0))]
    InvalidModel(Vec<Violation>),

    #[error("malformed model file: {0}")]
    MalformedModel(String),

    #[error("state {state} out of range (model has {count} states)")]
    StateOutOfRange { state: usize, count: usize },

    #[error("policy returned no decision at stage {stage}, state {state}")]
    UndefinedDecision { stage: usize, state: usize },

    #[error("policy chose inadmissible action {action} in state {state} at stage {stage}")]
    InadmissibleAction {
        stage: usize,
        state: usize,
        action: usize,
    },

    #[error("budget-dependent policy requires an initial budget")]
    MissingBudget,

    #[error("enumeration cap exceeded: {what} exceeds {cap}")]
    EnumerationCap { what: &'static str, cap: u64 },

    #[error(
        "budget grid too large: {points} points x {states} states over {stages} stages \
         needs about {bytes_required} bytes (cap {bytes_cap})"
    )]
    GridTooLarge {
        points: usize,
        states: usize,
        stages: usize,
        bytes_required: u128,
        bytes_cap: u128,
    },

    #[error("invalid budget grid: {0}")]
    InvalidGrid(String),

    #[error("no convergence after {iterations} iterations (last increment {last_increment:e})")]
    NotConverged {
        iterations: usize,
        last_increment: f64,
    },

    #[error("states {states:?} cannot reach the absorbing set")]
    AbsorptionUnreachable { states: Vec<usize> },

    #[error("risk level must lie in (0, 1), got {0}")]
    InvalidRiskLevel(f64),

    #[error("empty sample")]
    EmptySample,

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
