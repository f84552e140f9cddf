mod common;

use avar_mdp::risk::{
    avar_via_minimization, average_value_at_risk, expectation, rockafellar_objective,
    value_at_risk, worst_case,
};
use avar_mdp::{CostDistribution, RiskLevel};
use common::{alpha, coupled_samples, finite_distribution};
use proptest::prelude::*;

const TOL: f64 = 1e-10;

fn avar(samples: &[f64], a: f64) -> f64 {
    average_value_at_risk(
        &CostDistribution::empirical(samples).unwrap(),
        RiskLevel::new(a).unwrap(),
    )
}

proptest! {
    #[test]
    fn minimisation_matches_quantile_integral(dist in finite_distribution(), a in alpha()) {
        let level = RiskLevel::new(a).unwrap();
        let direct = average_value_at_risk(&dist, level);
        let m = avar_via_minimization(&dist, level);
        prop_assert!((m.value - direct).abs() <= TOL, "{} vs {}", m.value, direct);
        let var = value_at_risk(&dist, level);
        prop_assert!((rockafellar_objective(&dist, var, level) - m.value).abs() <= TOL);
        prop_assert!(m.s_star <= var + TOL);
    }

    #[test]
    fn ordering_between_measures(dist in finite_distribution(), a in alpha()) {
        let level = RiskLevel::new(a).unwrap();
        let v = value_at_risk(&dist, level);
        let av = average_value_at_risk(&dist, level);
        prop_assert!(v <= av + TOL);
        prop_assert!(expectation(&dist) <= av + TOL);
        prop_assert!(av <= worst_case(&dist) + TOL);
    }

    #[test]
    fn avar_is_nondecreasing_in_alpha(dist in finite_distribution(), a in alpha(), b in alpha()) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let l = average_value_at_risk(&dist, RiskLevel::new(lo).unwrap());
        let h = average_value_at_risk(&dist, RiskLevel::new(hi).unwrap());
        prop_assert!(l <= h + TOL);
    }

    #[test]
    fn translation_equivariance(dist in finite_distribution(), a in alpha(), c in -30.0f64..30.0) {
        let level = RiskLevel::new(a).unwrap();
        let shifted = dist.map(|v| v + c).unwrap();
        let lhs = average_value_at_risk(&shifted, level);
        prop_assert!((lhs - average_value_at_risk(&dist, level) - c).abs() <= TOL);
    }

    #[test]
    fn positive_homogeneity(dist in finite_distribution(), a in alpha(), lambda in 0.01f64..10.0) {
        let level = RiskLevel::new(a).unwrap();
        let scaled = dist.map(|v| lambda * v).unwrap();
        let lhs = average_value_at_risk(&scaled, level);
        prop_assert!((lhs - lambda * average_value_at_risk(&dist, level)).abs() <= TOL);
    }

    #[test]
    fn monotonicity((x, d) in coupled_samples(), a in alpha()) {
        let y: Vec<f64> = x.iter().zip(&d).map(|(x, d)| x + d.abs()).collect();
        prop_assert!(avar(&x, a) <= avar(&y, a) + TOL);
    }

    #[test]
    fn subadditivity((x, y) in coupled_samples(), a in alpha()) {
        let sum: Vec<f64> = x.iter().zip(&y).map(|(x, y)| x + y).collect();
        prop_assert!(avar(&sum, a) <= avar(&x, a) + avar(&y, a) + TOL);
    }
}
