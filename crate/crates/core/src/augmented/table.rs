use serde::Serialize;

use super::SGrid;
use crate::mdp::DecisionRule;

/// Offsets below this fraction of a step are treated as lying on a grid point.
const SNAP: f64 = 1e-9;

/// `w_n(x, s)` sampled on a budget grid, for `n` stages to go.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AugmentedValueTable {
    stage: usize,
    state_count: usize,
    grid: SGrid,
    /// Row-major: `values[x * grid.len() + i]`.
    values: Vec<f64>,
}

impl AugmentedValueTable {
    pub(crate) fn from_values(
        stage: usize,
        state_count: usize,
        grid: SGrid,
        values: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(values.len(), state_count * grid.len());
        Self {
            stage,
            state_count,
            grid,
            values,
        }
    }

    /// Number of stages to go this table was computed for.
    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn state_count(&self) -> usize {
        self.state_count
    }

    pub fn grid(&self) -> &SGrid {
        &self.grid
    }

    pub fn value(&self, state: usize, index: usize) -> f64 {
        self.values[state * self.grid.len() + index]
    }

    pub fn row(&self, state: usize) -> &[f64] {
        let n = self.grid.len();
        &self.values[state * n..(state + 1) * n]
    }

    /// `w(x, s)` at an arbitrary budget: linear interpolation between grid
    /// points, slope −1 continuation below `s_min` and constant continuation
    /// above `s_max`.
    ///
    /// The left continuation is exact: for `s <= 0` and nonnegative costs,
    /// `(C - s)^+ = C - s`, so `w(x, s) = w(x, 0) - s`.
    pub fn value_at(&self, state: usize, s: f64) -> f64 {
        let row = self.row(state);
        let s_min = self.grid.s_min();
        if s <= s_min {
            return row[0] + (s_min - s);
        }
        let pos = (s - s_min) / self.grid.step();
        let base = pos.floor();
        let frac = pos - base;
        let i = base as usize;
        let last = row.len() - 1;
        if i >= last {
            return row[last];
        }
        if frac < SNAP {
            row[i]
        } else if frac > 1.0 - SNAP {
            row[i + 1]
        } else {
            row[i] + frac * (row[i + 1] - row[i])
        }
    }

    /// Largest pointwise difference to another table on the same grid.
    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Checks nonnegativity, monotonicity and the 1-Lipschitz property in `s`,
    /// each up to `tol`. Returns a description of every failure.
    pub fn structural_violations(&self, tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        let step = self.grid.step();
        for x in 0..self.state_count {
            let row = self.row(x);
            for (i, &v) in row.iter().enumerate() {
                if v < -tol {
                    out.push(format!("w({x}, {}) = {v} is negative", self.grid.point(i)));
                }
            }
            for i in 1..row.len() {
                let d = row[i] - row[i - 1];
                if d > tol {
                    out.push(format!(
                        "w({x}, ·) increases by {d} at s = {}",
                        self.grid.point(i)
                    ));
                }
                if -d > step + tol {
                    out.push(format!(
                        "w({x}, ·) drops by {} over one step at s = {}",
                        -d,
                        self.grid.point(i)
                    ));
                }
            }
        }
        out
    }
}

/// Budget-dependent decision rule: one slice of actions per decision time,
/// each slice indexed by `(state, grid index)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AugmentedPolicy {
    grid: SGrid,
    state_count: usize,
    stages: Vec<Vec<u32>>,
    stationary: bool,
}

impl AugmentedPolicy {
    /// `stages[n]` is the decision slice for time `n`.
    pub(crate) fn finite(grid: SGrid, state_count: usize, stages: Vec<Vec<u32>>) -> Self {
        Self {
            grid,
            state_count,
            stages,
            stationary: false,
        }
    }

    pub(crate) fn stationary(grid: SGrid, state_count: usize, slice: Vec<u32>) -> Self {
        Self {
            grid,
            state_count,
            stages: vec![slice],
            stationary: true,
        }
    }

    pub fn grid(&self) -> &SGrid {
        &self.grid
    }

    pub fn is_stationary(&self) -> bool {
        self.stationary
    }

    /// Number of decision times stored (1 for a stationary policy).
    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }

    /// Action at decision time `stage` for grid index `index`.
    pub fn action_at(&self, stage: usize, state: usize, index: usize) -> Option<usize> {
        let slice = if self.stationary {
            &self.stages[0]
        } else {
            self.stages.get(stage)?
        };
        if state >= self.state_count || index >= self.grid.len() {
            return None;
        }
        Some(slice[state * self.grid.len() + index] as usize)
    }
}

impl DecisionRule for AugmentedPolicy {
    /// Off-grid budgets use the nearest grid point; budgets outside the grid
    /// use the nearest end.
    fn decide(&self, stage: usize, state: usize, budget: f64) -> Option<usize> {
        self.action_at(stage, state, self.grid.nearest_index(budget))
    }

    fn uses_budget(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> AugmentedValueTable {
        let grid = SGrid::new(-1.0, 2.0, 1.0).unwrap();
        AugmentedValueTable::from_values(1, 1, grid, vec![2.0, 1.0, 0.5, 0.0])
    }

    #[test]
    fn interpolation_and_extensions() {
        let t = table();
        assert_eq!(t.value_at(0, 0.0), 1.0);
        assert_eq!(t.value_at(0, 0.5), 0.75);
        assert_eq!(t.value_at(0, -1.0), 2.0);
        assert_eq!(t.value_at(0, -3.5), 4.5);
        assert_eq!(t.value_at(0, 2.0), 0.0);
        assert_eq!(t.value_at(0, 7.0), 0.0);
        assert!(t.structural_violations(1e-12).is_empty());
    }

    #[test]
    fn structure_checks_flag_problems() {
        let grid = SGrid::new(-1.0, 2.0, 1.0).unwrap();
        let bad = AugmentedValueTable::from_values(1, 1, grid, vec![3.5, 1.0, 1.5, -0.1]);
        let v = bad.structural_violations(1e-12);
        assert_eq!(v.len(), 4, "{v:?}");
    }
}
