//! Brute-force ground truth for tiny instances.
//!
//! Every deterministic policy of the relevant class is enumerated and scored
//! with its exact cost distribution. For AVaR the class is the set of maps
//! from reachable `(time, state, budget)` triples to actions: since the
//! remaining budget and the current state carry all the history the inner
//! objective `E[(C^N - s)^+]` depends on, this class is exhaustive.
//!
//! Nothing here shares code with the dynamic programming solvers beyond the
//! model itself and the path enumerator in [`crate::mdp`].

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mdp::{exact_cost_distribution, DecisionRule, FiniteMdp, MarkovPolicy};
use crate::risk::RiskLevel;
use crate::select::tie_tolerance;

/// Default limit on reachable `(time, state, budget)` triples.
pub const DEFAULT_REACHABLE_CAP: u64 = 1_000_000;

/// Default limit on policies enumerated per candidate budget.
pub const DEFAULT_POLICY_CAP: u64 = 1_000_000;

/// Budgets are identified after rounding to this resolution.
const BUDGET_RESOLUTION: f64 = 1e9;

fn budget_key(s: f64) -> i64 {
    (s * BUDGET_RESOLUTION).round() as i64
}

/// Forward closure of `(state, budget)` pairs under every admissible action,
/// with the budget reduced by each stage cost. `result[n]` lists the pairs at
/// time `n` for `n = 0..=N`, sorted by state then budget.
pub fn reachable_augmented_states(
    mdp: &FiniteMdp,
    x0: usize,
    horizon: usize,
    s0: f64,
) -> Result<Vec<Vec<(usize, f64)>>> {
    reachable_augmented_states_capped(mdp, x0, horizon, s0, DEFAULT_REACHABLE_CAP)
}

pub fn reachable_augmented_states_capped(
    mdp: &FiniteMdp,
    x0: usize,
    horizon: usize,
    s0: f64,
    cap: u64,
) -> Result<Vec<Vec<(usize, f64)>>> {
    mdp.check_state(x0)?;
    let mut stages = vec![vec![(x0, s0)]];
    let mut total = 1u64;
    for _ in 0..horizon {
        let mut next: BTreeMap<(usize, i64), f64> = BTreeMap::new();
        for &(x, s) in stages.last().expect("nonempty") {
            for &a in mdp.admissible(x) {
                let budget = s - mdp.cost(x, a);
                for &(x2, _) in mdp.successors(x, a) {
                    next.entry((x2, budget_key(budget))).or_insert(budget);
                }
            }
        }
        total += next.len() as u64;
        if total > cap {
            return Err(Error::EnumerationCap {
                what: "reachable augmented states",
                cap,
            });
        }
        stages.push(next.into_iter().map(|((x, _), s)| (x, s)).collect());
    }
    Ok(stages)
}

/// Distinct values `C^N` can take under some action sequence, ascending.
pub fn reachable_total_costs(mdp: &FiniteMdp, x0: usize, horizon: usize) -> Result<Vec<f64>> {
    let stages = reachable_augmented_states(mdp, x0, horizon, 0.0)?;
    let mut totals: BTreeMap<i64, f64> = BTreeMap::new();
    for &(_, s) in stages.last().expect("nonempty") {
        totals.entry(budget_key(-s)).or_insert(-s);
    }
    Ok(totals.into_values().collect())
}

/// Decision table on reachable `(time, state, budget)` triples.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ReachablePolicy {
    decisions: BTreeMap<(usize, usize, i64), usize>,
}

impl ReachablePolicy {
    pub fn len(&self) -> usize {
        self.decisions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decisions.is_empty()
    }

    /// `(time, state, budget, action)` entries in ascending order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64, usize)> + '_ {
        self.decisions
            .iter()
            .map(|(&(n, x, k), &a)| (n, x, k as f64 / BUDGET_RESOLUTION, a))
    }
}

impl DecisionRule for ReachablePolicy {
    fn decide(&self, stage: usize, state: usize, budget: f64) -> Option<usize> {
        self.decisions
            .get(&(stage, state, budget_key(budget)))
            .copied()
    }

    fn uses_budget(&self) -> bool {
        true
    }
}

/// A candidate assignment viewed as a decision rule.
struct Assignment<'a> {
    slots: &'a HashMap<(usize, usize, i64), usize>,
    fixed: &'a HashMap<(usize, usize, i64), usize>,
    choice: &'a [usize],
}

impl DecisionRule for Assignment<'_> {
    fn decide(&self, stage: usize, state: usize, budget: f64) -> Option<usize> {
        let key = (stage, state, budget_key(budget));
        match self.slots.get(&key) {
            Some(&slot) => Some(self.choice[slot]),
            None => self.fixed.get(&key).copied(),
        }
    }

    fn uses_budget(&self) -> bool {
        true
    }
}

/// Walks every combination of `options[i][..]` in lexicographic order with
/// the first position most significant.
fn for_each_combination(
    options: &[&[usize]],
    mut visit: impl FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    let mut digits = vec![0usize; options.len()];
    let mut current: Vec<usize> = options.iter().map(|o| o[0]).collect();
    loop {
        visit(&current)?;
        let mut pos = options.len();
        loop {
            if pos == 0 {
                return Ok(());
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < options[pos].len() {
                current[pos] = options[pos][digits[pos]];
                break;
            }
            digits[pos] = 0;
            current[pos] = options[pos][0];
        }
    }
}

fn checked_policy_count(options: &[&[usize]], cap: u64) -> Result<u64> {
    let mut count = 1u64;
    for o in options {
        count = count.saturating_mul(o.len() as u64);
        if count > cap {
            return Err(Error::EnumerationCap {
                what: "number of policies",
                cap,
            });
        }
    }
    Ok(count)
}

/// Minimum expected `N`-stage cost over all deterministic Markov policies.
/// Ties keep the lexicographically first policy.
pub fn oracle_min_expected(
    mdp: &FiniteMdp,
    x0: usize,
    horizon: usize,
) -> Result<(f64, MarkovPolicy)> {
    oracle_min_expected_capped(mdp, x0, horizon, DEFAULT_POLICY_CAP)
}

pub fn oracle_min_expected_capped(
    mdp: &FiniteMdp,
    x0: usize,
    horizon: usize,
    cap: u64,
) -> Result<(f64, MarkovPolicy)> {
    mdp.check_state(x0)?;
    let n = mdp.state_count();
    let options: Vec<&[usize]> = (0..horizon)
        .flat_map(|_| (0..n).map(|x| mdp.admissible(x)))
        .collect();
    checked_policy_count(&options, cap)?;

    let mut best: Option<(f64, Vec<usize>)> = None;
    for_each_combination(&options, |choice| {
        let policy = MarkovPolicy::new(choice.chunks(n).map(|c| c.to_vec()).collect());
        let mean = exact_cost_distribution(mdp, &policy, x0, horizon, None)?.mean();
        let better = match &best {
            None => true,
            Some((v, _)) => mean < v - tie_tolerance(*v),
        };
        if better {
            best = Some((mean, choice.to_vec()));
        }
        Ok(())
    })?;
    let (value, choice) = best.expect("at least one policy");
    let stages = if n == 0 {
        Vec::new()
    } else {
        choice.chunks(n).map(|c| c.to_vec()).collect()
    };
    Ok((value, MarkovPolicy::new(stages)))
}

/// `min_π E[(C^N - s)^+]` for one budget, with the minimising policy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InnerOptimum {
    pub s: f64,
    pub value: f64,
    pub policy_count: u64,
    pub policy: ReachablePolicy,
}

pub fn oracle_inner(mdp: &FiniteMdp, x0: usize, horizon: usize, s: f64) -> Result<InnerOptimum> {
    oracle_inner_capped(mdp, x0, horizon, s, DEFAULT_POLICY_CAP)
}

pub fn oracle_inner_capped(
    mdp: &FiniteMdp,
    x0: usize,
    horizon: usize,
    s: f64,
    cap: u64,
) -> Result<InnerOptimum> {
    let reach = reachable_augmented_states(mdp, x0, horizon, s)?;
    let mut slots: HashMap<(usize, usize, i64), usize> = HashMap::new();
    let mut fixed: HashMap<(usize, usize, i64), usize> = HashMap::new();
    let mut keys: Vec<(usize, usize, i64)> = Vec::new();
    let mut options: Vec<&[usize]> = Vec::new();
    for (stage, pairs) in reach.iter().take(horizon).enumerate() {
        for &(x, budget) in pairs {
            let key = (stage, x, budget_key(budget));
            let admissible = mdp.admissible(x);
            if admissible.len() == 1 {
                fixed.insert(key, admissible[0]);
            } else {
                slots.insert(key, options.len());
                keys.push(key);
                options.push(admissible);
            }
        }
    }
    let policy_count = checked_policy_count(&options, cap)?;

    let mut best: Option<(f64, Vec<usize>)> = None;
    for_each_combination(&options, |choice| {
        let rule = Assignment {
            slots: &slots,
            fixed: &fixed,
            choice,
        };
        let value = exact_cost_distribution(mdp, &rule, x0, horizon, Some(s))?.expected_excess(s);
        let better = match &best {
            None => true,
            Some((v, _)) => value < v - tie_tolerance(*v),
        };
        if better {
            best = Some((value, choice.to_vec()));
        }
        Ok(())
    })?;
    let (value, choice) = best.expect("at least one policy");

    let mut decisions: BTreeMap<(usize, usize, i64), usize> = fixed.into_iter().collect();
    decisions.extend(keys.into_iter().zip(choice));
    Ok(InnerOptimum {
        s,
        value,
        policy_count,
        policy: ReachablePolicy { decisions },
    })
}

/// Inner optima for each candidate budget, evaluated in parallel and
/// returned in ascending budget order with duplicates removed.
pub fn oracle_inner_values(
    mdp: &FiniteMdp,
    x0: usize,
    horizon: usize,
    candidates: &[f64],
) -> Result<Vec<InnerOptimum>> {
    if candidates.is_empty() {
        return Err(Error::InvalidParameter("empty candidate list".into()));
    }
    let mut sorted = candidates.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup_by(|a, b| budget_key(*a) == budget_key(*b));
    sorted
        .par_iter()
        .map(|&s| oracle_inner(mdp, x0, horizon, s))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleAvar {
    pub avar: f64,
    pub s_star: f64,
    pub policy: ReachablePolicy,
}

/// Outer minimisation of `s + inner(s) / (1 - α)` over precomputed inner
/// optima; the smallest minimising budget wins.
pub fn minimize_over_candidates(inner: &[InnerOptimum], level: RiskLevel) -> Result<OracleAvar> {
    let weight = level.tail_weight();
    let objective: Vec<f64> = inner.iter().map(|o| o.s + weight * o.value).collect();
    let best = objective.iter().copied().fold(f64::INFINITY, f64::min);
    let i = objective
        .iter()
        .position(|&g| g <= best + tie_tolerance(best))
        .ok_or_else(|| Error::InvalidParameter("empty candidate list".into()))?;
    Ok(OracleAvar {
        avar: objective[i],
        s_star: inner[i].s,
        policy: inner[i].policy.clone(),
    })
}

/// `min_s min_π { s + E[(C^N - s)^+] / (1 - α) }` with `s` ranging over
/// `candidates`.
pub fn oracle_min_avar(
    mdp: &FiniteMdp,
    x0: usize,
    horizon: usize,
    level: RiskLevel,
    candidates: &[f64],
) -> Result<OracleAvar> {
    let inner = oracle_inner_values(mdp, x0, horizon, candidates)?;
    minimize_over_candidates(&inner, level)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn level(a: f64) -> RiskLevel {
        RiskLevel::new(a).unwrap()
    }

    fn deterministic(cost: f64) -> FiniteMdp {
        FiniteMdp::builder(1, 1)
            .action(0, 0, cost, &[(0, 1.0)])
            .build()
            .unwrap()
    }

    fn two_paths() -> FiniteMdp {
        FiniteMdp::builder(2, 2)
            .action(0, 0, 2.0, &[(1, 1.0)])
            .action(0, 1, 1.0, &[(1, 1.0)])
            .action(1, 0, 0.0, &[(1, 1.0)])
            .build()
            .unwrap()
    }

    #[test]
    fn single_action_has_one_pair_per_stage() {
        let reach = reachable_augmented_states(&deterministic(1.0), 0, 3, 2.0).unwrap();
        assert_eq!(
            reach,
            vec![
                vec![(0, 2.0)],
                vec![(0, 1.0)],
                vec![(0, 0.0)],
                vec![(0, -1.0)]
            ]
        );
    }

    #[test]
    fn zero_cost_keeps_the_budget() {
        let mdp = FiniteMdp::builder(2, 1)
            .action(0, 0, 0.0, &[(0, 0.5), (1, 0.5)])
            .action(1, 0, 0.0, &[(0, 1.0)])
            .build()
            .unwrap();
        let reach = reachable_augmented_states(&mdp, 0, 3, 1.5).unwrap();
        assert!(reach.iter().flatten().all(|&(_, s)| s == 1.5));
    }

    #[test]
    fn two_state_hand_enumeration() {
        // From (0, 3): action 0 (cost 2) or 1 (cost 1) lead to state 1, which
        // then pays nothing.
        let reach = reachable_augmented_states(&two_paths(), 0, 2, 3.0).unwrap();
        assert_eq!(reach[1], vec![(1, 1.0), (1, 2.0)]);
        assert_eq!(reach[2], vec![(1, 1.0), (1, 2.0)]);
        assert_eq!(
            reachable_total_costs(&two_paths(), 0, 2).unwrap(),
            vec![1.0, 2.0]
        );
    }

    #[test]
    fn reachable_cap() {
        let mdp = FiniteMdp::builder(1, 2)
            .action(0, 0, 1.0, &[(0, 1.0)])
            .action(0, 1, 1.5, &[(0, 1.0)])
            .build()
            .unwrap();
        let err = reachable_augmented_states_capped(&mdp, 0, 40, 0.0, 100).unwrap_err();
        assert!(matches!(err, Error::EnumerationCap { .. }));
    }

    #[test]
    fn expected_examples() {
        let (v, _) = oracle_min_expected(&deterministic(1.5), 0, 2).unwrap();
        assert_eq!(v, 3.0);
        let (v, policy) = oracle_min_expected(&two_paths(), 0, 1).unwrap();
        assert_eq!(v, 1.0);
        assert_eq!(policy.action(0, 0), 1);
    }

    #[test]
    fn avar_examples() {
        let mdp = deterministic(1.0);
        let candidates: Vec<f64> = (0..=4).map(f64::from).collect();
        let o = oracle_min_avar(&mdp, 0, 3, level(0.6), &candidates).unwrap();
        assert_eq!((o.avar, o.s_star), (3.0, 3.0));

        let free = deterministic(0.0);
        let o = oracle_min_avar(&free, 0, 3, level(0.6), &candidates).unwrap();
        assert_eq!((o.avar, o.s_star), (0.0, 0.0));

        assert!(oracle_min_avar(&mdp, 0, 3, level(0.6), &[]).is_err());
    }

    #[test]
    fn combinations_are_lexicographic() {
        let a: &[usize] = &[0, 1];
        let b: &[usize] = &[2, 3, 4];
        let mut seen = Vec::new();
        for_each_combination(&[a, b], |c| {
            seen.push(c.to_vec());
            Ok(())
        })
        .unwrap();
        assert_eq!(
            seen,
            vec![
                vec![0, 2],
                vec![0, 3],
                vec![0, 4],
                vec![1, 2],
                vec![1, 3],
                vec![1, 4]
            ]
        );
    }
}
