#![allow(dead_code)]

use std::path::PathBuf;

use avar_mdp::mdp::load_model;
use avar_mdp::{CostDistribution, FiniteMdp};
use proptest::prelude::*;

/// Integer-cost instances small enough for brute force, with the horizon
/// used for each.
pub const ORACLE_INSTANCES: [(&str, usize); 3] =
    [("safe_risky", 4), ("three_state", 3), ("absorbing", 4)];

pub fn model_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("models")
        .join(format!("{name}.json"))
}

pub fn bundled(name: &str) -> FiniteMdp {
    load_model(model_path(name)).unwrap()
}

/// Random models with 1 to 3 states, up to 2 actions, integer costs in
/// `0..=3` and rational transition probabilities.
pub fn small_mdp() -> impl Strategy<Value = FiniteMdp> {
    (1usize..=3, 1usize..=2).prop_flat_map(|(n, m)| {
        let per_action = (0u8..=3, prop::collection::vec(0u8..=3, n), any::<bool>());
        prop::collection::vec(prop::collection::vec(per_action, m), n).prop_map(move |layout| {
            let mut b = FiniteMdp::builder(n, m);
            for (x, actions) in layout.iter().enumerate() {
                for (a, (cost, weights, enabled)) in actions.iter().enumerate() {
                    if a > 0 && !enabled {
                        continue;
                    }
                    let mut weights: Vec<u32> = weights.iter().map(|&w| w as u32).collect();
                    if weights.iter().all(|&w| w == 0) {
                        weights[x] = 1;
                    }
                    let total: u32 = weights.iter().sum();
                    let row: Vec<(usize, f64)> = weights
                        .iter()
                        .enumerate()
                        .filter(|(_, &w)| w > 0)
                        .map(|(y, &w)| (y, w as f64 / total as f64))
                        .collect();
                    b = b.action(x, a, *cost as f64, &row);
                }
            }
            b.build().unwrap()
        })
    })
}

/// Finite distributions with up to 8 atoms.
pub fn finite_distribution() -> impl Strategy<Value = CostDistribution> {
    prop::collection::vec((-50.0f64..50.0, 1u32..10), 1..8).prop_map(|atoms| {
        let total: u32 = atoms.iter().map(|(_, w)| w).sum();
        CostDistribution::new(atoms.into_iter().map(|(v, w)| (v, w as f64 / total as f64))).unwrap()
    })
}

/// Two variables on a common space of equally likely outcomes.
pub fn coupled_samples() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..12).prop_flat_map(|n| {
        (
            prop::collection::vec(-20.0f64..20.0, n),
            prop::collection::vec(-20.0f64..20.0, n),
        )
    })
}

pub fn alpha() -> impl Strategy<Value = f64> {
    0.01f64..0.99
}
