use rayon::prelude::*;
use serde::Serialize;

use super::grid::{build_sgrid_capped, DEFAULT_MEMORY_CAP_BYTES};
use super::{AugmentedPolicy, AugmentedValueTable, SGrid};
use crate::error::{Error, Result};
use crate::mdp::FiniteMdp;
use crate::neutral::{
    check_absorbing_reachability, value_iteration_infinite, ValueIterationConfig,
};
use crate::risk::RiskLevel;
use crate::select::argmin_lowest;

/// `w_0(x, s) = (C^0 - s)^+ = max(-s, 0)`.
pub fn terminal_table(mdp: &FiniteMdp, grid: &SGrid) -> AugmentedValueTable {
    let row: Vec<f64> = grid.points().map(|s| (-s).max(0.0)).collect();
    let values = row.repeat(mdp.state_count());
    AugmentedValueTable::from_values(0, mdp.state_count(), *grid, values)
}

/// One step of the budget-augmented Bellman operator:
///
/// ```text
/// (T w)(x, s) = min_{a ∈ A(x)} Σ_{x'} Q(x'|x, a) · w(x', s - c(x, a))
/// ```
///
/// Returns the new table (one more stage to go) and the greedy action per
/// `(x, grid index)`, ties to the lowest action.
pub fn bellman_backup(
    mdp: &FiniteMdp,
    next: &AugmentedValueTable,
) -> (AugmentedValueTable, Vec<u32>) {
    let grid = *next.grid();
    let len = grid.len();
    let mut values = vec![0.0; mdp.state_count() * len];
    let mut actions = vec![0u32; mdp.state_count() * len];
    values
        .par_chunks_mut(len)
        .zip(actions.par_chunks_mut(len))
        .enumerate()
        .for_each(|(x, (value_row, action_row))| {
            let mut candidates = Vec::with_capacity(mdp.admissible(x).len());
            for i in 0..len {
                let s = grid.point(i);
                candidates.clear();
                for &a in mdp.admissible(x) {
                    let budget = s - mdp.cost(x, a);
                    let expected: f64 = mdp
                        .successors(x, a)
                        .iter()
                        .map(|&(x2, p)| p * next.value_at(x2, budget))
                        .sum();
                    candidates.push((a, expected));
                }
                let (a, v) =
                    argmin_lowest(&candidates).expect("every state has an admissible action");
                value_row[i] = v;
                action_row[i] = a as u32;
            }
        });
    (
        AugmentedValueTable::from_values(next.stage() + 1, mdp.state_count(), grid, values),
        actions,
    )
}

/// All tables `w_0 ..= w_N` and the stagewise greedy policy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteAugmentedSolution {
    /// `tables[k]` holds `w_k`, the value with `k` stages to go.
    pub tables: Vec<AugmentedValueTable>,
    /// Decision time `n` acts greedily with respect to `w_{N-n-1}`.
    pub policy: AugmentedPolicy,
}

impl FiniteAugmentedSolution {
    pub fn horizon(&self) -> usize {
        self.tables.len() - 1
    }

    /// `w_N`.
    pub fn final_table(&self) -> &AugmentedValueTable {
        self.tables.last().expect("at least the terminal table")
    }
}

/// `w_N(x, s) = min_π E[(C^N - s)^+]` by `N` backups from the terminal table.
pub fn solve_w_finite(
    mdp: &FiniteMdp,
    horizon: usize,
    grid: &SGrid,
) -> Result<FiniteAugmentedSolution> {
    solve_w_finite_capped(mdp, horizon, grid, DEFAULT_MEMORY_CAP_BYTES)
}

pub fn solve_w_finite_capped(
    mdp: &FiniteMdp,
    horizon: usize,
    grid: &SGrid,
    memory_cap: u128,
) -> Result<FiniteAugmentedSolution> {
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    grid.check_memory(mdp.state_count(), horizon + 1, horizon, memory_cap)?;
    let mut tables = Vec::with_capacity(horizon + 1);
    let mut slices = Vec::with_capacity(horizon);
    tables.push(terminal_table(mdp, grid));
    for _ in 0..horizon {
        let (table, greedy) = bellman_backup(mdp, tables.last().expect("nonempty"));
        tables.push(table);
        slices.push(greedy);
    }
    // The backup producing w_k serves decision time N - k.
    slices.reverse();
    Ok(FiniteAugmentedSolution {
        tables,
        policy: AugmentedPolicy::finite(*grid, mdp.state_count(), slices),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InfiniteConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for InfiniteConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_iterations: 100_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Convergence {
    pub iterations: usize,
    /// Sup-norm change of the last backup.
    pub last_increment: f64,
    /// Geometric tail estimate `δ_k ρ / (1 - ρ)` with `ρ = δ_k / δ_{k-1}`,
    /// when the increments are contracting.
    pub tail_estimate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfiniteAugmentedSolution {
    pub table: AugmentedValueTable,
    pub policy: AugmentedPolicy,
    pub convergence: Convergence,
}

/// `w_∞` by monotone iteration of [`bellman_backup`] from the terminal table.
pub fn solve_w_infinite(
    mdp: &FiniteMdp,
    grid: &SGrid,
    config: &InfiniteConfig,
) -> Result<InfiniteAugmentedSolution> {
    check_absorbing_reachability(mdp)?;
    grid.check_memory(mdp.state_count(), 2, 1, DEFAULT_MEMORY_CAP_BYTES)?;
    let mut current = terminal_table(mdp, grid);
    let mut previous_increment = f64::NAN;
    let mut last_increment = f64::INFINITY;
    for iteration in 1..=config.max_iterations {
        let (next, greedy) = bellman_backup(mdp, &current);
        last_increment = next.sup_distance(&current);
        current = next;
        if last_increment < config.tolerance {
            let ratio = last_increment / previous_increment;
            let tail_estimate =
                (ratio.is_finite() && ratio < 1.0).then(|| last_increment * ratio / (1.0 - ratio));
            return Ok(InfiniteAugmentedSolution {
                policy: AugmentedPolicy::stationary(*grid, mdp.state_count(), greedy),
                table: current,
                convergence: Convergence {
                    iterations: iteration,
                    last_increment,
                    tail_estimate,
                },
            });
        }
        previous_increment = last_increment;
    }
    Err(Error::NotConverged {
        iterations: config.max_iterations,
        last_increment,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OuterMinimum {
    pub s_star: f64,
    pub avar: f64,
    pub index: usize,
}

/// Minimises `g(s) = s + w(x0, s) / (1 - α)` over the grid, returning the
/// smallest minimiser.
///
/// Left of the grid `g` has slope `-α/(1-α) < 0`, and right of `N c_max` it
/// has slope 1, so on a grid covering `[0, N c_max]` nothing outside can do
/// better.
pub fn outer_minimize_avar(
    table: &AugmentedValueTable,
    x0: usize,
    level: RiskLevel,
) -> Result<OuterMinimum> {
    if x0 >= table.state_count() {
        return Err(Error::StateOutOfRange {
            state: x0,
            count: table.state_count(),
        });
    }
    let weight = level.tail_weight();
    let grid = table.grid();
    let candidates: Vec<(usize, f64)> = table
        .row(x0)
        .iter()
        .enumerate()
        .map(|(i, &w)| (i, grid.point(i) + weight * w))
        .collect();
    let (index, avar) = argmin_lowest(&candidates).expect("grid is nonempty");
    Ok(OuterMinimum {
        s_star: grid.point(index),
        avar,
        index,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Horizon {
    Finite(usize),
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveOptions {
    pub step: f64,
    pub margin: f64,
    /// Upper end of the budget grid for the infinite horizon. When absent it
    /// is set to twenty times the largest risk-neutral value, plus the margin.
    pub s_max: Option<f64>,
    pub infinite: InfiniteConfig,
    pub memory_cap_bytes: u128,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            step: 1.0,
            margin: 1.0,
            s_max: None,
            infinite: InfiniteConfig::default(),
            memory_cap_bytes: DEFAULT_MEMORY_CAP_BYTES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum AugmentedTables {
    Finite(FiniteAugmentedSolution),
    Infinite(InfiniteAugmentedSolution),
}

/// Optimal AVaR at `x0` together with the budget-threaded policy that
/// attains it. The policy is started with budget `s_star`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AvarSolution {
    pub x0: usize,
    pub alpha: f64,
    pub horizon: Horizon,
    pub avar: f64,
    pub s_star: f64,
    pub grid: SGrid,
    pub tables: AugmentedTables,
}

impl AvarSolution {
    pub fn policy(&self) -> &AugmentedPolicy {
        match &self.tables {
            AugmentedTables::Finite(f) => &f.policy,
            AugmentedTables::Infinite(i) => &i.policy,
        }
    }

    /// Table the outer minimisation ran on.
    pub fn value_table(&self) -> &AugmentedValueTable {
        match &self.tables {
            AugmentedTables::Finite(f) => f.final_table(),
            AugmentedTables::Infinite(i) => &i.table,
        }
    }

    pub fn convergence(&self) -> Option<Convergence> {
        match &self.tables {
            AugmentedTables::Finite(_) => None,
            AugmentedTables::Infinite(i) => Some(i.convergence),
        }
    }
}

/// Budget grid used by [`solve_avar`] for the given horizon and options.
pub fn grid_for(mdp: &FiniteMdp, horizon: Horizon, options: &SolveOptions) -> Result<SGrid> {
    match horizon {
        Horizon::Finite(n) => build_sgrid_capped(
            mdp,
            n,
            options.step,
            options.margin,
            options.memory_cap_bytes,
        ),
        Horizon::Infinite => {
            let top = match options.s_max {
                Some(s) => s,
                None => {
                    let neutral = value_iteration_infinite(
                        mdp,
                        &ValueIterationConfig {
                            tolerance: options.infinite.tolerance,
                            max_iterations: options.infinite.max_iterations,
                            discount: None,
                        },
                    )?;
                    20.0 * neutral.values.iter().copied().fold(0.0, f64::max)
                }
            };
            let grid = SGrid::covering(top.max(0.0), options.step, options.margin)?;
            grid.check_memory(mdp.state_count(), 2, 1, options.memory_cap_bytes)?;
            Ok(grid)
        }
    }
}

/// Solves `min_π AVaR_α(C)` from `x0` by the inner budget DP and the outer
/// minimisation over the grid.
pub fn solve_avar(
    mdp: &FiniteMdp,
    x0: usize,
    horizon: Horizon,
    level: RiskLevel,
    options: &SolveOptions,
) -> Result<AvarSolution> {
    mdp.check_state(x0)?;
    let grid = grid_for(mdp, horizon, options)?;
    let tables = match horizon {
        Horizon::Finite(n) => AugmentedTables::Finite(solve_w_finite_capped(
            mdp,
            n,
            &grid,
            options.memory_cap_bytes,
        )?),
        Horizon::Infinite => {
            AugmentedTables::Infinite(solve_w_infinite(mdp, &grid, &options.infinite)?)
        }
    };
    let table = match &tables {
        AugmentedTables::Finite(f) => f.final_table(),
        AugmentedTables::Infinite(i) => &i.table,
    };
    let outer = outer_minimize_avar(table, x0, level)?;
    Ok(AvarSolution {
        x0,
        alpha: level.alpha(),
        horizon,
        avar: outer.avar,
        s_star: outer.s_star,
        grid,
        tables,
    })
}
