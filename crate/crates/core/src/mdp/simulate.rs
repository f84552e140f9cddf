use rand::Rng;
use serde::Serialize;

use super::{DecisionRule, FiniteMdp};
use crate::distribution::CostDistribution;
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Phase};

/// Default limit on the number of paths enumerated by [`exact_cost_distribution`].
pub const DEFAULT_PATH_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RolloutTrace {
    /// `x_0 ..= x_N`.
    pub states: Vec<usize>,
    /// `a_0 .. a_{N-1}`.
    pub actions: Vec<usize>,
    pub stage_costs: Vec<f64>,
    /// Remaining budgets `s_0 ..= s_N` with `s_{n+1} = s_n - c(x_n, a_n)`.
    pub budgets: Vec<f64>,
    pub total_cost: f64,
}

fn decide_checked<P: DecisionRule + ?Sized>(
    mdp: &FiniteMdp,
    policy: &P,
    stage: usize,
    state: usize,
    budget: f64,
) -> Result<usize> {
    let action = policy
        .decide(stage, state, budget)
        .ok_or(Error::UndefinedDecision { stage, state })?;
    if mdp.is_admissible(state, action) {
        Ok(action)
    } else {
        Err(Error::InadmissibleAction {
            stage,
            state,
            action,
        })
    }
}

fn initial_budget<P: DecisionRule + ?Sized>(policy: &P, s0: Option<f64>) -> Result<f64> {
    match s0 {
        Some(s) => Ok(s),
        None if policy.uses_budget() => Err(Error::MissingBudget),
        None => Ok(0.0),
    }
}

/// Simulates `horizon` steps from `x0`. Successors are drawn by inverse-CDF
/// sampling over the sorted successor list with one uniform per step from
/// ChaCha8 seeded with `seed` (see [`crate::rng`]).
pub fn rollout<P: DecisionRule + ?Sized>(
    mdp: &FiniteMdp,
    policy: &P,
    x0: usize,
    horizon: usize,
    seed: u64,
    s0: Option<f64>,
) -> Result<RolloutTrace> {
    mdp.check_state(x0)?;
    let mut budget = initial_budget(policy, s0)?;
    let mut rng = stream_rng(seed, Phase::Evaluation, 0);

    let mut trace = RolloutTrace {
        states: Vec::with_capacity(horizon + 1),
        actions: Vec::with_capacity(horizon),
        stage_costs: Vec::with_capacity(horizon),
        budgets: Vec::with_capacity(horizon + 1),
        total_cost: 0.0,
    };
    let mut state = x0;
    trace.states.push(state);
    trace.budgets.push(budget);
    for stage in 0..horizon {
        let action = decide_checked(mdp, policy, stage, state, budget)?;
        let cost = mdp.cost(state, action);
        let u: f64 = rng.gen();
        let successors = mdp.successors(state, action);
        let mut cumulative = 0.0;
        let mut next = successors[successors.len() - 1].0;
        for &(x2, p) in successors {
            cumulative += p;
            if u < cumulative {
                next = x2;
                break;
            }
        }
        budget -= cost;
        trace.actions.push(action);
        trace.stage_costs.push(cost);
        trace.total_cost += cost;
        trace.states.push(next);
        trace.budgets.push(budget);
        state = next;
    }
    Ok(trace)
}

/// Exact law of `C^N = Σ_{n<N} c(x_n, a_n)` by enumerating every path with
/// positive probability. Refuses with [`Error::EnumerationCap`] rather than
/// truncate.
pub fn exact_cost_distribution<P: DecisionRule + ?Sized>(
    mdp: &FiniteMdp,
    policy: &P,
    x0: usize,
    horizon: usize,
    s0: Option<f64>,
) -> Result<CostDistribution> {
    exact_cost_distribution_capped(mdp, policy, x0, horizon, s0, DEFAULT_PATH_CAP)
}

pub fn exact_cost_distribution_capped<P: DecisionRule + ?Sized>(
    mdp: &FiniteMdp,
    policy: &P,
    x0: usize,
    horizon: usize,
    s0: Option<f64>,
    path_cap: u64,
) -> Result<CostDistribution> {
    mdp.check_state(x0)?;
    let budget = initial_budget(policy, s0)?;
    let mut walker = PathWalker {
        mdp,
        policy,
        horizon,
        path_cap,
        leaves: Vec::new(),
    };
    walker.visit(0, x0, budget, 0.0, 1.0)?;
    CostDistribution::new(walker.leaves)
}

struct PathWalker<'a, P: ?Sized> {
    mdp: &'a FiniteMdp,
    policy: &'a P,
    horizon: usize,
    path_cap: u64,
    leaves: Vec<(f64, f64)>,
}

impl<P: DecisionRule + ?Sized> PathWalker<'_, P> {
    fn visit(
        &mut self,
        stage: usize,
        state: usize,
        budget: f64,
        cost: f64,
        prob: f64,
    ) -> Result<()> {
        if stage == self.horizon {
            if self.leaves.len() as u64 >= self.path_cap {
                return Err(Error::EnumerationCap {
                    what: "number of paths",
                    cap: self.path_cap,
                });
            }
            self.leaves.push((cost, prob));
            return Ok(());
        }
        let action = decide_checked(self.mdp, self.policy, stage, state, budget)?;
        let c = self.mdp.cost(state, action);
        for &(next, p) in self.mdp.successors(state, action) {
            self.visit(stage + 1, next, budget - c, cost + c, prob * p)?;
        }
        Ok(())
    }
}
