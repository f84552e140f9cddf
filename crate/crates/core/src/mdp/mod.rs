//! Finite Markov decision models.
//!
//! A [`FiniteMdp`] holds states `0..n`, actions `0..m`, an admissible action
//! set per state, a transition kernel `Q(x' | x, a)` and nonnegative stage
//! costs `c(x, a)`. Models are stage-invariant: the same kernel and costs apply
//! at every time step. Disturbances are folded into the kernel.
//!
//! Models are built from a [`ModelFile`] (the JSON document format) and are
//! immutable once validated.

mod file;
mod policy;
mod simulate;

pub use file::{load_model, parse_model, CostRecord, ModelFile, TransitionRecord};
pub use policy::{DecisionRule, MarkovPolicy, StationaryPolicy};
pub use simulate::{
    exact_cost_distribution, exact_cost_distribution_capped, rollout, RolloutTrace,
    DEFAULT_PATH_CAP,
};

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Allowed deviation of a kernel row sum from one.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// A single way in which a model document breaks the model invariants.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NoStates,
    NoActions,
    AdmissibleLength {
        expected: usize,
        found: usize,
    },
    NoAdmissibleAction {
        state: usize,
    },
    AdmissibleOutOfRange {
        state: usize,
        action: usize,
    },
    DuplicateAdmissible {
        state: usize,
        action: usize,
    },
    TransitionOutOfRange {
        record: usize,
    },
    TransitionInadmissible {
        record: usize,
        state: usize,
        action: usize,
    },
    InvalidProbability {
        record: usize,
        probability: f64,
    },
    RowSum {
        state: usize,
        action: usize,
        sum: f64,
    },
    CostOutOfRange {
        record: usize,
    },
    CostInadmissible {
        record: usize,
        state: usize,
        action: usize,
    },
    DuplicateCost {
        record: usize,
        state: usize,
        action: usize,
    },
    NonFiniteCost {
        record: usize,
    },
    NegativeCost {
        state: usize,
        action: usize,
        cost: f64,
    },
    MissingCost {
        state: usize,
        action: usize,
    },
    AbsorbingOutOfRange {
        state: usize,
    },
    NotAbsorbing {
        state: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            NoStates => write!(f, "model has no states"),
            NoActions => write!(f, "model has no actions"),
            AdmissibleLength { expected, found } => {
                write!(f, "admissible lists {found} states, expected {expected}")
            }
            NoAdmissibleAction { state } => write!(f, "state {state} has no admissible action"),
            AdmissibleOutOfRange { state, action } => {
                write!(f, "state {state} lists out-of-range action {action}")
            }
            DuplicateAdmissible { state, action } => {
                write!(f, "state {state} lists action {action} twice")
            }
            TransitionOutOfRange { record } => {
                write!(
                    f,
                    "transitions[{record}] references an out-of-range state or action"
                )
            }
            TransitionInadmissible {
                record,
                state,
                action,
            } => write!(
                f,
                "transitions[{record}] uses inadmissible pair ({state}, {action})"
            ),
            InvalidProbability {
                record,
                probability,
            } => write!(
                f,
                "transitions[{record}] has probability {probability} outside [0, 1]"
            ),
            RowSum { state, action, sum } => write!(
                f,
                "kernel row ({state}, {action}) sums to {sum}, expected 1"
            ),
            CostOutOfRange { record } => {
                write!(
                    f,
                    "costs[{record}] references an out-of-range state or action"
                )
            }
            CostInadmissible {
                record,
                state,
                action,
            } => write!(
                f,
                "costs[{record}] uses inadmissible pair ({state}, {action})"
            ),
            DuplicateCost {
                record,
                state,
                action,
            } => write!(f, "costs[{record}] repeats the cost of ({state}, {action})"),
            NonFiniteCost { record } => write!(f, "costs[{record}] is not finite"),
            NegativeCost {
                state,
                action,
                cost,
            } => {
                write!(f, "cost of ({state}, {action}) is negative: {cost}")
            }
            MissingCost { state, action } => write!(f, "no cost given for ({state}, {action})"),
            AbsorbingOutOfRange { state } => write!(f, "absorbing state {state} out of range"),
            NotAbsorbing { state } => write!(
                f,
                "state {state} is declared absorbing but has no zero-cost self-loop action"
            ),
        }
    }
}

/// Result of [`validate_model`]; empty iff the document describes a valid model.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks a model document against the model invariants.
pub fn validate_model(doc: &ModelFile) -> ValidationReport {
    ValidationReport {
        violations: assemble(doc).err().unwrap_or_default(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMdp {
    state_count: usize,
    action_count: usize,
    admissible: Vec<Vec<usize>>,
    /// Successor lists per `(x, a)`, indexed `x * action_count + a`, sorted by
    /// successor with zero-probability entries removed.
    kernel: Vec<Vec<(usize, f64)>>,
    cost: Vec<f64>,
    absorbing: Vec<usize>,
    absorbing_declared: bool,
}

impl FiniteMdp {
    pub fn from_file(doc: &ModelFile) -> Result<Self> {
        assemble(doc).map_err(Error::InvalidModel)
    }

    pub fn builder(state_count: usize, action_count: usize) -> MdpBuilder {
        MdpBuilder {
            doc: ModelFile {
                states: state_count,
                actions: action_count,
                admissible: vec![Vec::new(); state_count],
                transitions: Vec::new(),
                costs: Vec::new(),
                absorbing: None,
            },
        }
    }

    pub fn state_count(&self) -> usize {
        self.state_count
    }

    pub fn action_count(&self) -> usize {
        self.action_count
    }

    /// Admissible actions of `state` in ascending order.
    pub fn admissible(&self, state: usize) -> &[usize] {
        &self.admissible[state]
    }

    pub fn is_admissible(&self, state: usize, action: usize) -> bool {
        state < self.state_count && self.admissible[state].binary_search(&action).is_ok()
    }

    /// Successors of an admissible pair with positive probability.
    pub fn successors(&self, state: usize, action: usize) -> &[(usize, f64)] {
        &self.kernel[state * self.action_count + action]
    }

    pub fn cost(&self, state: usize, action: usize) -> f64 {
        self.cost[state * self.action_count + action]
    }

    /// Largest stage cost over admissible pairs.
    pub fn max_cost(&self) -> f64 {
        (0..self.state_count)
            .flat_map(|x| self.admissible[x].iter().map(move |&a| self.cost(x, a)))
            .fold(0.0, f64::max)
    }

    /// Declared absorbing states, or when none were declared, every state with
    /// an admissible zero-cost self-loop.
    pub fn absorbing_states(&self) -> &[usize] {
        &self.absorbing
    }

    pub fn absorbing_declared(&self) -> bool {
        self.absorbing_declared
    }

    pub fn has_zero_cost_self_loop(&self, state: usize) -> bool {
        self.admissible[state]
            .iter()
            .any(|&a| self.is_zero_cost_self_loop(state, a))
    }

    fn is_zero_cost_self_loop(&self, state: usize, action: usize) -> bool {
        self.cost(state, action) == 0.0 && self.successors(state, action) == [(state, 1.0)]
    }

    pub fn check_state(&self, state: usize) -> Result<()> {
        if state < self.state_count {
            Ok(())
        } else {
            Err(Error::StateOutOfRange {
                state,
                count: self.state_count,
            })
        }
    }

    /// Validation of an already-built model is always clean.
    pub fn validate(&self) -> ValidationReport {
        validate_model(&self.to_file())
    }

    /// Serialisable document describing this model.
    pub fn to_file(&self) -> ModelFile {
        let mut transitions = Vec::new();
        let mut costs = Vec::new();
        for x in 0..self.state_count {
            for &a in &self.admissible[x] {
                costs.push(CostRecord {
                    x,
                    a,
                    c: self.cost(x, a),
                });
                for &(x2, p) in self.successors(x, a) {
                    transitions.push(TransitionRecord { x, a, x2, p });
                }
            }
        }
        ModelFile {
            states: self.state_count,
            actions: self.action_count,
            admissible: self.admissible.clone(),
            transitions,
            costs,
            absorbing: self.absorbing_declared.then(|| self.absorbing.clone()),
        }
    }
}

/// Incremental construction of small models, mostly for tests and examples.
#[derive(Debug, Clone)]
pub struct MdpBuilder {
    doc: ModelFile,
}

impl MdpBuilder {
    /// Adds an admissible action with its cost and successor law.
    pub fn action(
        mut self,
        state: usize,
        action: usize,
        cost: f64,
        successors: &[(usize, f64)],
    ) -> Self {
        if let Some(list) = self.doc.admissible.get_mut(state) {
            list.push(action);
        }
        self.doc.costs.push(CostRecord {
            x: state,
            a: action,
            c: cost,
        });
        for &(x2, p) in successors {
            self.doc.transitions.push(TransitionRecord {
                x: state,
                a: action,
                x2,
                p,
            });
        }
        self
    }

    pub fn absorbing(mut self, states: &[usize]) -> Self {
        self.doc.absorbing = Some(states.to_vec());
        self
    }

    pub fn into_file(self) -> ModelFile {
        self.doc
    }

    pub fn build(self) -> Result<FiniteMdp> {
        FiniteMdp::from_file(&self.doc)
    }
}

fn assemble(doc: &ModelFile) -> std::result::Result<FiniteMdp, Vec<Violation>> {
    let mut violations = Vec::new();
    let n = doc.states;
    let m = doc.actions;
    if n == 0 {
        violations.push(Violation::NoStates);
    }
    if m == 0 {
        violations.push(Violation::NoActions);
    }
    if doc.admissible.len() != n {
        violations.push(Violation::AdmissibleLength {
            expected: n,
            found: doc.admissible.len(),
        });
    }
    if !violations.is_empty() {
        return Err(violations);
    }

    let mut admissible: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut allowed = vec![false; n * m];
    for (x, list) in doc.admissible.iter().enumerate() {
        let mut actions = Vec::with_capacity(list.len());
        for &a in list {
            if a >= m {
                violations.push(Violation::AdmissibleOutOfRange {
                    state: x,
                    action: a,
                });
            } else if allowed[x * m + a] {
                violations.push(Violation::DuplicateAdmissible {
                    state: x,
                    action: a,
                });
            } else {
                allowed[x * m + a] = true;
                actions.push(a);
            }
        }
        if list.is_empty() {
            violations.push(Violation::NoAdmissibleAction { state: x });
        }
        actions.sort_unstable();
        admissible.push(actions);
    }

    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n * m];
    for (record, t) in doc.transitions.iter().enumerate() {
        if t.x >= n || t.a >= m || t.x2 >= n {
            violations.push(Violation::TransitionOutOfRange { record });
            continue;
        }
        if !allowed[t.x * m + t.a] {
            violations.push(Violation::TransitionInadmissible {
                record,
                state: t.x,
                action: t.a,
            });
            continue;
        }
        if !(0.0..=1.0).contains(&t.p) {
            violations.push(Violation::InvalidProbability {
                record,
                probability: t.p,
            });
            continue;
        }
        rows[t.x * m + t.a].push((t.x2, t.p));
    }

    let mut cost = vec![0.0; n * m];
    let mut has_cost = vec![false; n * m];
    for (record, c) in doc.costs.iter().enumerate() {
        if c.x >= n || c.a >= m {
            violations.push(Violation::CostOutOfRange { record });
            continue;
        }
        let idx = c.x * m + c.a;
        if !allowed[idx] {
            violations.push(Violation::CostInadmissible {
                record,
                state: c.x,
                action: c.a,
            });
        } else if has_cost[idx] {
            violations.push(Violation::DuplicateCost {
                record,
                state: c.x,
                action: c.a,
            });
        } else if !c.c.is_finite() {
            has_cost[idx] = true;
            violations.push(Violation::NonFiniteCost { record });
        } else {
            if c.c < 0.0 {
                violations.push(Violation::NegativeCost {
                    state: c.x,
                    action: c.a,
                    cost: c.c,
                });
            }
            has_cost[idx] = true;
            cost[idx] = c.c;
        }
    }

    for (x, actions) in admissible.iter().enumerate() {
        for &a in actions {
            let idx = x * m + a;
            let row = &mut rows[idx];
            row.sort_by_key(|&(x2, _)| x2);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for &(x2, p) in row.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == x2 => last.1 += p,
                    _ => merged.push((x2, p)),
                }
            }
            let sum: f64 = merged.iter().map(|&(_, p)| p).sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                violations.push(Violation::RowSum {
                    state: x,
                    action: a,
                    sum,
                });
            }
            merged.retain(|&(_, p)| p > 0.0);
            *row = merged;
            if !has_cost[idx] {
                violations.push(Violation::MissingCost {
                    state: x,
                    action: a,
                });
            }
        }
    }

    if !violations.is_empty() {
        return Err(violations);
    }

    let mut mdp = FiniteMdp {
        state_count: n,
        action_count: m,
        admissible,
        kernel: rows,
        cost,
        absorbing: Vec::new(),
        absorbing_declared: doc.absorbing.is_some(),
    };

    match &doc.absorbing {
        Some(declared) => {
            let mut states = Vec::new();
            for &x in declared {
                if x >= n {
                    violations.push(Violation::AbsorbingOutOfRange { state: x });
                } else if !mdp.has_zero_cost_self_loop(x) {
                    violations.push(Violation::NotAbsorbing { state: x });
                } else {
                    states.push(x);
                }
            }
            states.sort_unstable();
            states.dedup();
            mdp.absorbing = states;
        }
        None => {
            mdp.absorbing = (0..n).filter(|&x| mdp.has_zero_cost_self_loop(x)).collect();
        }
    }

    if violations.is_empty() {
        Ok(mdp)
    } else {
        Err(violations)
    }
}
