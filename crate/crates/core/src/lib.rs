//! Risk-averse optimal control of finite Markov decision processes under the
//! Average-Value-at-Risk (AVaR, also known as CVaR) criterion.
//!
//! The solver works on the augmented state `(x, s)` where `s` is the remaining
//! cost budget. For a fixed budget `s` the inner problem
//! `w(x, s) = min_π E[(C - s)^+]` is solved by dynamic programming on a uniform
//! budget grid; the outer problem `min_s { s + w(x0, s) / (1 - α) }` then gives
//! the optimal AVaR and the budget `s*` at which the optimal policy starts.
//!
//! Module map:
//!
//! - [`mdp`]: finite models, policies, seeded rollouts and exact cost laws.
//! - [`distribution`] and [`risk`]: discrete cost distributions, VaR, AVaR and
//!   the Rockafellar-Uryasev objective.
//! - [`neutral`]: risk-neutral backward induction and value iteration.
//! - [`augmented`]: budget-augmented dynamic programming and the AVaR solver.
//! - [`oracle`]: brute-force policy enumeration on tiny instances.
//! - [`lq`]: scalar linear-quadratic example with a budget-switching heuristic.

pub mod augmented;
pub mod distribution;
pub mod error;
pub mod lq;
pub mod mdp;
pub mod neutral;
pub mod oracle;
pub mod risk;
pub mod rng;

mod select;

pub use distribution::CostDistribution;
pub use error::{Error, Result};
pub use mdp::FiniteMdp;
pub use risk::RiskLevel;
