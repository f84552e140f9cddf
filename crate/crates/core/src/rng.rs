//! Seed derivation.
//!
//! All randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`), a portable
//! generator whose output is identical on every platform. A user seed `S`
//! initialises the key through `SeedableRng::seed_from_u64(S)`; independent
//! sub-streams are selected with `set_stream`, so trajectory `i` of phase `p`
//! reads stream `(p << 56) | i`. Normal variates use `rand_distr::StandardNormal`
//! (ziggurat), pinned through `Cargo.lock`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream family used for a generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Phase {
    /// Finite-MDP rollouts and policy evaluation.
    Evaluation = 0,
    /// Samples used to fix the global budget before evaluation.
    BudgetEstimation = 1,
}

pub fn stream_rng(seed: u64, phase: Phase, index: u64) -> ChaCha8Rng {
    debug_assert!(index < (1 << 56));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((phase as u64) << 56) | index);
    rng
}
