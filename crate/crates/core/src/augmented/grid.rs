use serde::Serialize;

use crate::error::{Error, Result};
use crate::mdp::FiniteMdp;

/// Default memory budget for value tables plus policies.
pub const DEFAULT_MEMORY_CAP_BYTES: u128 = 1 << 30;

/// Uniform grid over the budget coordinate `s`.
///
/// Points are `k * step` for integer `k` in `first..first + len`, so zero is
/// always a grid point and points are reproduced exactly for integer steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SGrid {
    first: i64,
    len: usize,
    step: f64,
}

impl SGrid {
    /// Grid from `s_min` to `s_max`. Both ends must be multiples of `step`
    /// (within 1e-9 steps) and bracket zero.
    pub fn new(s_min: f64, s_max: f64, step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "step must be positive, got {step}"
            )));
        }
        if !(s_min <= 0.0 && 0.0 <= s_max) {
            return Err(Error::InvalidGrid(format!(
                "range [{s_min}, {s_max}] must contain 0"
            )));
        }
        let lo = (s_min / step).round();
        let hi = (s_max / step).round();
        if (lo - s_min / step).abs() > 1e-9 || (hi - s_max / step).abs() > 1e-9 {
            return Err(Error::InvalidGrid(format!(
                "range [{s_min}, {s_max}] is not a multiple of step {step}"
            )));
        }
        Ok(Self {
            first: lo as i64,
            len: (hi - lo) as usize + 1,
            step,
        })
    }

    /// Grid covering `[-margin, top + margin]`, each end pushed outwards to the
    /// next multiple of `step`.
    pub fn covering(top: f64, step: f64, margin: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "step must be positive, got {step}"
            )));
        }
        if !(margin >= 0.0 && top >= 0.0) {
            return Err(Error::InvalidGrid(
                "margin and top must be nonnegative".into(),
            ));
        }
        let lo = -snap_up(margin / step);
        let hi = snap_up((top + margin) / step);
        Ok(Self {
            first: lo as i64,
            len: (hi - lo) as usize + 1,
            step,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn point(&self, index: usize) -> f64 {
        (self.first + index as i64) as f64 * self.step
    }

    pub fn s_min(&self) -> f64 {
        self.point(0)
    }

    pub fn s_max(&self) -> f64 {
        self.point(self.len - 1)
    }

    pub fn zero_index(&self) -> usize {
        (-self.first) as usize
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|i| self.point(i))
    }

    /// Grid index of `s` if it lies on the grid within 1e-9 steps.
    pub fn index_of(&self, s: f64) -> Option<usize> {
        let k = (s / self.step).round();
        if (k - s / self.step).abs() > 1e-9 {
            return None;
        }
        let i = k as i64 - self.first;
        (0..self.len as i64).contains(&i).then_some(i as usize)
    }

    /// Index of the grid point nearest to `s`, clamped to the grid.
    pub fn nearest_index(&self, s: f64) -> usize {
        let k = (s / self.step).round() as i64 - self.first;
        k.clamp(0, self.len as i64 - 1) as usize
    }

    /// Bytes needed for `tables` value tables and `policy_stages` policy
    /// slices over `states` states.
    pub fn memory_estimate(&self, states: usize, tables: usize, policy_stages: usize) -> u128 {
        let cells = self.len as u128 * states as u128;
        cells * (8 * tables as u128 + 4 * policy_stages as u128)
    }

    pub fn check_memory(
        &self,
        states: usize,
        tables: usize,
        policy_stages: usize,
        cap: u128,
    ) -> Result<()> {
        let bytes_required = self.memory_estimate(states, tables, policy_stages);
        if bytes_required > cap {
            Err(Error::GridTooLarge {
                points: self.len,
                states,
                stages: policy_stages,
                bytes_required,
                bytes_cap: cap,
            })
        } else {
            Ok(())
        }
    }
}

fn snap_up(x: f64) -> f64 {
    // Tolerate representation error just above an integer.
    let r = x.round();
    if (x - r).abs() <= 1e-9 {
        r
    } else {
        x.ceil()
    }
}

/// Budget grid for an `N`-stage problem: `[-margin, N * c_max + margin]`,
/// snapped outwards to multiples of `step`. With integer costs and `step = 1`
/// every reachable budget `s - Σc` from an integer `s` lands on the grid.
pub fn build_sgrid(mdp: &FiniteMdp, horizon: usize, step: f64, margin: f64) -> Result<SGrid> {
    build_sgrid_capped(mdp, horizon, step, margin, DEFAULT_MEMORY_CAP_BYTES)
}

pub fn build_sgrid_capped(
    mdp: &FiniteMdp,
    horizon: usize,
    step: f64,
    margin: f64,
    memory_cap: u128,
) -> Result<SGrid> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidGrid(format!(
            "step must be positive, got {step}"
        )));
    }
    let top = horizon as f64 * mdp.max_cost();
    let points = ((top + 2.0 * margin) / step).ceil() + 3.0;
    let cells = points * mdp.state_count() as f64;
    // Reject absurd sizes before allocating anything, including the index range.
    let estimate = cells * (8.0 * (horizon + 1) as f64 + 4.0 * horizon as f64);
    if !estimate.is_finite() || estimate > memory_cap as f64 || points > i64::MAX as f64 / 4.0 {
        return Err(Error::GridTooLarge {
            points: points.min(usize::MAX as f64) as usize,
            states: mdp.state_count(),
            stages: horizon,
            bytes_required: estimate.min(u128::MAX as f64) as u128,
            bytes_cap: memory_cap,
        });
    }
    let grid = SGrid::covering(top, step, margin)?;
    grid.check_memory(mdp.state_count(), horizon + 1, horizon, memory_cap)?;
    Ok(grid)
}
