use serde::Serialize;

/// A deterministic decision rule: the action taken at time `stage` in `state`
/// when the remaining budget is `budget`.
///
/// Rules that ignore the budget return `false` from [`DecisionRule::uses_budget`].
/// Returning `None` means the rule is undefined at that point.
pub trait DecisionRule {
    fn decide(&self, stage: usize, state: usize, budget: f64) -> Option<usize>;

    fn uses_budget(&self) -> bool {
        false
    }
}

impl<T: DecisionRule + ?Sized> DecisionRule for &T {
    fn decide(&self, stage: usize, state: usize, budget: f64) -> Option<usize> {
        (**self).decide(stage, state, budget)
    }

    fn uses_budget(&self) -> bool {
        (**self).uses_budget()
    }
}

/// Decision per `(stage, state)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MarkovPolicy {
    decisions: Vec<Vec<usize>>,
}

impl MarkovPolicy {
    /// `decisions[n][x]` is the action at time `n` in state `x`.
    pub fn new(decisions: Vec<Vec<usize>>) -> Self {
        Self { decisions }
    }

    pub fn horizon(&self) -> usize {
        self.decisions.len()
    }

    pub fn action(&self, stage: usize, state: usize) -> usize {
        self.decisions[stage][state]
    }

    pub fn stages(&self) -> &[Vec<usize>] {
        &self.decisions
    }
}

impl DecisionRule for MarkovPolicy {
    fn decide(&self, stage: usize, state: usize, _budget: f64) -> Option<usize> {
        self.decisions.get(stage)?.get(state).copied()
    }
}

/// Decision per state, the same at every stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StationaryPolicy {
    decisions: Vec<usize>,
}

impl StationaryPolicy {
    pub fn new(decisions: Vec<usize>) -> Self {
        Self { decisions }
    }

    pub fn action(&self, state: usize) -> usize {
        self.decisions[state]
    }

    pub fn decisions(&self) -> &[usize] {
        &self.decisions
    }
}

impl DecisionRule for StationaryPolicy {
    fn decide(&self, _stage: usize, state: usize, _budget: f64) -> Option<usize> {
        self.decisions.get(state).copied()
    }
}
