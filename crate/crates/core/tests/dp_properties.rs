mod common;

use avar_mdp::augmented::{build_sgrid, solve_avar, solve_w_finite, Horizon, SolveOptions};
use avar_mdp::mdp::{exact_cost_distribution, MarkovPolicy};
use avar_mdp::neutral::backward_induction;
use avar_mdp::oracle::{oracle_inner_values, oracle_min_avar, oracle_min_expected};
use avar_mdp::risk::{average_value_at_risk, rockafellar_objective};
use avar_mdp::{Error, RiskLevel};
use common::small_mdp;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tables_are_nonnegative_nonincreasing_and_lipschitz(mdp in small_mdp(), horizon in 1usize..5) {
        let grid = build_sgrid(&mdp, horizon, 1.0, 2.0).unwrap();
        let sol = solve_w_finite(&mdp, horizon, &grid).unwrap();
        for table in &sol.tables {
            let v = table.structural_violations(1e-9);
            prop_assert!(v.is_empty(), "{:?}", v);
        }
    }

    #[test]
    fn tables_grow_with_the_horizon(mdp in small_mdp()) {
        let grid = build_sgrid(&mdp, 6, 1.0, 1.0).unwrap();
        let sol = solve_w_finite(&mdp, 6, &grid).unwrap();
        for pair in sol.tables.windows(2) {
            for x in 0..mdp.state_count() {
                for i in 0..grid.len() {
                    prop_assert!(pair[0].value(x, i) <= pair[1].value(x, i) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn nonpositive_budgets_reduce_to_the_neutral_problem(mdp in small_mdp(), horizon in 1usize..5) {
        let grid = build_sgrid(&mdp, horizon, 1.0, 3.0).unwrap();
        let sol = solve_w_finite(&mdp, horizon, &grid).unwrap();
        let neutral = backward_induction(&mdp, horizon).unwrap();
        for stage in 1..=horizon {
            let table = &sol.tables[stage];
            let u = &neutral.values[horizon - stage];
            for (x, &ux) in u.iter().enumerate() {
                for i in 0..=grid.zero_index() {
                    let s = grid.point(i);
                    prop_assert!((table.value(x, i) - (ux - s)).abs() <= 1e-9);
                    prop_assert_eq!(
                        sol.policy.action_at(horizon - stage, x, i),
                        Some(neutral.policy.action(horizon - stage, x))
                    );
                }
            }
        }
    }

    #[test]
    fn solver_policy_attains_the_reported_value(mdp in small_mdp(), horizon in 1usize..4, a in 0.05f64..0.95) {
        let level = RiskLevel::new(a).unwrap();
        let sol = solve_avar(&mdp, 0, Horizon::Finite(horizon), level, &SolveOptions::default()).unwrap();
        let dist = exact_cost_distribution(&mdp, sol.policy(), 0, horizon, Some(sol.s_star)).unwrap();
        let objective = rockafellar_objective(&dist, sol.s_star, level);
        prop_assert!((objective - sol.avar).abs() <= 1e-9, "{} vs {}", objective, sol.avar);
        // The attained AVaR can only be lower than the objective at s_star.
        prop_assert!(average_value_at_risk(&dist, level) <= sol.avar + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn solver_matches_brute_force(mdp in small_mdp(), horizon in 1usize..3, a in 0.05f64..0.95) {
        let level = RiskLevel::new(a).unwrap();
        let sol = solve_avar(&mdp, 0, Horizon::Finite(horizon), level, &SolveOptions::default()).unwrap();
        let candidates: Vec<f64> = sol.grid.points().collect();
        let oracle = oracle_min_avar(&mdp, 0, horizon, level, &candidates).unwrap();
        prop_assert!((sol.avar - oracle.avar).abs() <= 1e-9, "{} vs {}", sol.avar, oracle.avar);
        prop_assert!((sol.s_star - oracle.s_star).abs() <= sol.grid.step());
    }

    #[test]
    fn inner_values_are_nonincreasing_and_lipschitz(mdp in small_mdp(), horizon in 1usize..3) {
        let candidates: Vec<f64> = (-2..=8).map(f64::from).collect();
        let inner = oracle_inner_values(&mdp, 0, horizon, &candidates).unwrap();
        for pair in inner.windows(2) {
            let drop = pair[0].value - pair[1].value;
            prop_assert!(drop >= -1e-12);
            prop_assert!(drop <= pair[1].s - pair[0].s + 1e-12);
        }
    }

    #[test]
    fn oracle_beats_every_markov_policy(mdp in small_mdp(), horizon in 1usize..3, a in 0.05f64..0.95, pick in any::<u64>()) {
        let level = RiskLevel::new(a).unwrap();
        let candidates: Vec<f64> = (-1..=(3 * horizon as i32 + 1)).map(f64::from).collect();
        let oracle = oracle_min_avar(&mdp, 0, horizon, level, &candidates).unwrap();
        let mut bits = pick;
        let stages = (0..horizon)
            .map(|_| {
                (0..mdp.state_count())
                    .map(|x| {
                        let adm = mdp.admissible(x);
                        let a = adm[(bits % adm.len() as u64) as usize];
                        bits /= adm.len() as u64;
                        a
                    })
                    .collect()
            })
            .collect();
        let policy = MarkovPolicy::new(stages);
        let dist = exact_cost_distribution(&mdp, &policy, 0, horizon, None).unwrap();
        prop_assert!(oracle.avar <= average_value_at_risk(&dist, level) + 1e-9);
    }

    #[test]
    fn very_negative_budget_recovers_the_expected_cost(mdp in small_mdp(), horizon in 1usize..4) {
        let s = -100.0;
        let inner = match oracle_inner_values(&mdp, 0, horizon, &[s]) {
            Err(Error::EnumerationCap { .. }) => return Err(TestCaseError::reject("beyond the enumeration cap")),
            other => other.unwrap(),
        };
        let (expected, _) = oracle_min_expected(&mdp, 0, horizon).unwrap();
        prop_assert!((inner[0].value + s - expected).abs() <= 1e-9);
    }

    #[test]
    fn exact_law_mean_matches_backward_induction(mdp in small_mdp(), horizon in 1usize..5) {
        let neutral = backward_induction(&mdp, horizon).unwrap();
        for x in 0..mdp.state_count() {
            let dist = exact_cost_distribution(&mdp, &neutral.policy, x, horizon, None).unwrap();
            prop_assert!((dist.total_mass() - 1.0).abs() <= 1e-9);
            prop_assert!((dist.mean() - neutral.values[0][x]).abs() <= 1e-9);
        }
    }
}
