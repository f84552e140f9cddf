//! Budget-augmented dynamic programming for AVaR.
//!
//! The state is extended with the remaining budget `s`; each stage cost is
//! subtracted from it, and a run is charged `(-s_N)^+ = (C^N - s_0)^+` at the
//! end. Minimising that expected charge for every start `(x, s)` gives
//! `w_N(x, s)`, and
//!
//! ```text
//! min_π AVaR_α(C^N) = min_s { s + w_N(x0, s) / (1 - α) }.
//! ```
//!
//! Horizon convention: `C^N = Σ_{n=0}^{N-1} c(x_n, a_n)` has `N` stages and
//! takes `N` backups from the terminal table `w_0(x, s) = max(-s, 0)`.

mod export;
mod grid;
mod solve;
mod table;

pub use export::{write_policy_csv, write_value_tables_csv, POLICY_CSV_HEADER, VALUE_CSV_HEADER};
pub use grid::{build_sgrid, build_sgrid_capped, SGrid, DEFAULT_MEMORY_CAP_BYTES};
pub use solve::{
    bellman_backup, grid_for, outer_minimize_avar, solve_avar, solve_w_finite,
    solve_w_finite_capped, solve_w_infinite, terminal_table, AugmentedTables, AvarSolution,
    Convergence, FiniteAugmentedSolution, Horizon, InfiniteAugmentedSolution, InfiniteConfig,
    OuterMinimum, SolveOptions,
};
pub use table::{AugmentedPolicy, AugmentedValueTable};
