//! Risk-neutral dynamic programming.
//!
//! Once the remaining budget is exhausted the AVaR problem reduces to plain
//! expected total cost, which this module solves by backward induction over a
//! finite horizon or by monotone value iteration over the undiscounted
//! infinite horizon.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mdp::{FiniteMdp, MarkovPolicy, StationaryPolicy};
use crate::select::argmin_lowest;

/// Optimal expected costs `u_n(x)` for `n = 0..=N` and the minimising policy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeutralSolution {
    /// `values[n][x] = u_n(x)`, with `values[N] ≡ 0`.
    pub values: Vec<Vec<f64>>,
    pub policy: MarkovPolicy,
}

impl NeutralSolution {
    pub fn initial_value(&self, state: usize) -> f64 {
        self.values[0][state]
    }
}

/// `c(x, a) + Σ Q(x'|x, a) u(x')`.
pub fn q_value(mdp: &FiniteMdp, next: &[f64], state: usize, action: usize) -> f64 {
    mdp.cost(state, action)
        + mdp
            .successors(state, action)
            .iter()
            .map(|&(x2, p)| p * next[x2])
            .sum::<f64>()
}

/// One application of `u ↦ min_a { c + γ E[u(x')] }`, returning values and the
/// lowest-index minimiser per state.
fn sweep(mdp: &FiniteMdp, next: &[f64], discount: f64) -> (Vec<f64>, Vec<usize>) {
    let mut values = Vec::with_capacity(mdp.state_count());
    let mut actions = Vec::with_capacity(mdp.state_count());
    let mut candidates = Vec::new();
    for x in 0..mdp.state_count() {
        candidates.clear();
        for &a in mdp.admissible(x) {
            let future: f64 = mdp
                .successors(x, a)
                .iter()
                .map(|&(x2, p)| p * next[x2])
                .sum();
            candidates.push((a, mdp.cost(x, a) + discount * future));
        }
        let (a, v) = argmin_lowest(&candidates).expect("every state has an admissible action");
        values.push(v);
        actions.push(a);
    }
    (values, actions)
}

/// Finite-horizon backward induction with `u_N ≡ 0`.
pub fn backward_induction(mdp: &FiniteMdp, horizon: usize) -> Result<NeutralSolution> {
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    let n = mdp.state_count();
    let mut values = vec![vec![0.0; n]; horizon + 1];
    let mut decisions = vec![Vec::new(); horizon];
    for stage in (0..horizon).rev() {
        let (v, a) = sweep(mdp, &values[stage + 1], 1.0);
        values[stage] = v;
        decisions[stage] = a;
    }
    Ok(NeutralSolution {
        values,
        policy: MarkovPolicy::new(decisions),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValueIterationConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Discount factor. `None` is the undiscounted total-cost criterion; a
    /// value below one turns the iteration into a discounted approximation
    /// and skips the absorption check.
    pub discount: Option<f64>,
}

impl Default for ValueIterationConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_iterations: 100_000,
            discount: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfiniteSolution {
    pub values: Vec<f64>,
    pub policy: StationaryPolicy,
    pub iterations: usize,
    pub last_increment: f64,
}

/// Confirms every state can reach an absorbing state with positive
/// probability. When that holds for all states, the stationary policy that
/// follows a shortest route into the absorbing set is absorbed with
/// probability one, so the optimal total cost is finite.
pub fn check_absorbing_reachability(mdp: &FiniteMdp) -> Result<()> {
    let n = mdp.state_count();
    let mut predecessors: Vec<Vec<usize>> = vec![Vec::new(); n];
    for x in 0..n {
        for &a in mdp.admissible(x) {
            for &(x2, _) in mdp.successors(x, a) {
                predecessors[x2].push(x);
            }
        }
    }
    let mut reaches = vec![false; n];
    let mut queue: VecDeque<usize> = mdp.absorbing_states().iter().copied().collect();
    for &x in &queue {
        reaches[x] = true;
    }
    while let Some(x) = queue.pop_front() {
        for &p in &predecessors[x] {
            if !reaches[p] {
                reaches[p] = true;
                queue.push_back(p);
            }
        }
    }
    let missing: Vec<usize> = (0..n).filter(|&x| !reaches[x]).collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Error::AbsorptionUnreachable { states: missing })
    }
}

/// Monotone value iteration from `u ≡ 0`, stopping once the sup-norm
/// increment falls below `tolerance`.
pub fn value_iteration_infinite(
    mdp: &FiniteMdp,
    config: &ValueIterationConfig,
) -> Result<InfiniteSolution> {
    let discount = match config.discount {
        Some(g) if (0.0..1.0).contains(&g) => g,
        Some(g) => {
            return Err(Error::InvalidParameter(format!(
                "discount must lie in [0, 1), got {g}"
            )))
        }
        None => {
            check_absorbing_reachability(mdp)?;
            1.0
        }
    };
    let mut values = vec![0.0; mdp.state_count()];
    let mut last_increment = f64::INFINITY;
    for iteration in 1..=config.max_iterations {
        let (next, _) = sweep(mdp, &values, discount);
        last_increment = sup_distance(&next, &values);
        values = next;
        if last_increment < config.tolerance {
            // Greedy policy with respect to the converged values.
            let (_, greedy) = sweep(mdp, &values, discount);
            return Ok(InfiniteSolution {
                values,
                policy: StationaryPolicy::new(greedy),
                iterations: iteration,
                last_increment,
            });
        }
    }
    Err(Error::NotConverged {
        iterations: config.max_iterations,
        last_increment,
    })
}

/// Total expected cost of a stationary policy, by iterating its own Bellman
/// operator from zero.
pub fn evaluate_stationary(
    mdp: &FiniteMdp,
    policy: &StationaryPolicy,
    tolerance: f64,
    max_iterations: usize,
) -> Result<Vec<f64>> {
    let n = mdp.state_count();
    for x in 0..n {
        if !mdp.is_admissible(x, policy.action(x)) {
            return Err(Error::InadmissibleAction {
                stage: 0,
                state: x,
                action: policy.action(x),
            });
        }
    }
    let mut values = vec![0.0; n];
    let mut last_increment = f64::INFINITY;
    for _ in 0..max_iterations {
        let next: Vec<f64> = (0..n)
            .map(|x| q_value(mdp, &values, x, policy.action(x)))
            .collect();
        last_increment = sup_distance(&next, &values);
        values = next;
        if last_increment < tolerance {
            return Ok(values);
        }
    }
    Err(Error::NotConverged {
        iterations: max_iterations,
        last_increment,
    })
}

/// Expected `N`-stage cost of a Markov policy from every start state.
pub fn evaluate_markov(mdp: &FiniteMdp, policy: &MarkovPolicy) -> Vec<f64> {
    let mut values = vec![0.0; mdp.state_count()];
    for stage in (0..policy.horizon()).rev() {
        values = (0..mdp.state_count())
            .map(|x| q_value(mdp, &values, x, policy.action(stage, x)))
            .collect();
    }
    values
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
