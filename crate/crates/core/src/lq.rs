//! Scalar linear-quadratic example.
//!
//! Dynamics `x_{n+1} = x_n + a_n + σ Z_n` with `Z_n` standard normal, stage
//! cost `x_n² + a_n²` charged before the transition, horizon `N`. The
//! risk-neutral problem is solved by the Riccati recursion
//! `K_N = 0`, `K_n = K_{n+1} / (1 + K_{n+1}) + 1`, with feedback
//! `a = -K_{n+1} / (1 + K_{n+1}) · x`.
//!
//! The budget heuristic plays `a = 0` while the running budget is positive,
//! subtracting `x_n²` after each such stage, and switches permanently to the
//! Riccati feedback at the first stage where the budget is `<= 0`.
//!
//! Trajectory `i` draws `Z_0..Z_{N-1}` in order from stream `i` of its phase
//! (see [`crate::rng`]), whatever the policy, so policies compared on the
//! same seed see the same noise.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::risk::{sample_risk, to_empirical, value_at_risk, RiskLevel};
use crate::rng::{stream_rng, Phase};

/// Number of batches for batch-means standard errors of VaR and AVaR.
pub const STDERR_BATCHES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LqParams {
    pub horizon: usize,
    pub alpha: RiskLevel,
    pub noise_std: f64,
    pub x0: f64,
    pub samples: usize,
    pub seed: u64,
}

impl LqParams {
    pub fn new(horizon: usize, alpha: RiskLevel, samples: usize, seed: u64) -> Result<Self> {
        let params = Self {
            horizon,
            alpha,
            noise_std: 1.0,
            x0: 0.0,
            samples,
            seed,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::InvalidParameter("horizon must be at least 1".into()));
        }
        if self.samples == 0 {
            return Err(Error::InvalidParameter(
                "sample count must be at least 1".into(),
            ));
        }
        if !(self.noise_std > 0.0 && self.noise_std.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise_std must be positive, got {}",
                self.noise_std
            )));
        }
        if !self.x0.is_finite() {
            return Err(Error::InvalidParameter("x0 must be finite".into()));
        }
        Ok(())
    }
}

/// Riccati coefficients for horizon `N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiccatiTable {
    /// `K_0 ..= K_N`.
    pub k: Vec<f64>,
    /// `g_0 .. g_{N-1}`, with `g_{N-1} = 0`.
    pub gain: Vec<f64>,
    /// `offset[n] = Σ_{i=n+1}^{N-1} K_i` for `n = 0 ..= N`.
    pub offset: Vec<f64>,
}

impl RiccatiTable {
    pub fn horizon(&self) -> usize {
        self.gain.len()
    }

    /// Optimal expected cost-to-go `K_n x² + offset_n`.
    pub fn value(&self, stage: usize, x: f64) -> f64 {
        self.k[stage] * x * x + self.offset[stage]
    }

    /// Riccati feedback at time `stage`.
    pub fn action(&self, stage: usize, x: f64) -> f64 {
        let a = self.gain[stage] * x;
        // Avoid printing -0 for the zero gain or state.
        if a == 0.0 {
            0.0
        } else {
            a
        }
    }
}

pub fn riccati_recursion(horizon: usize) -> Result<RiccatiTable> {
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    let mut k = vec![0.0; horizon + 1];
    let mut gain = vec![0.0; horizon];
    for n in (0..horizon).rev() {
        let next = k[n + 1];
        let ratio = next / (1.0 + next);
        gain[n] = -ratio;
        k[n] = (1.0 - ratio) * next + 1.0;
    }
    let mut offset = vec![0.0; horizon + 1];
    for n in (0..horizon.saturating_sub(1)).rev() {
        offset[n] = offset[n + 1] + k[n + 1];
    }
    Ok(RiccatiTable { k, gain, offset })
}

/// The risk-neutral optimal feedback `(n, x) -> g_n x`.
pub fn lq_neutral_policy(table: &RiccatiTable) -> impl Fn(usize, f64) -> f64 + '_ {
    move |n, x| table.action(n, x)
}

/// Policies available to the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum LqRule {
    /// `a_n = 0` throughout.
    Zero,
    /// Riccati feedback.
    Neutral,
    /// Zero action while the budget is positive, then Riccati feedback.
    Heuristic { budget: f64 },
}

impl LqRule {
    pub fn name(&self) -> &'static str {
        match self {
            LqRule::Zero => "zero",
            LqRule::Neutral => "neutral",
            LqRule::Heuristic { .. } => "heuristic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LqTrajectory {
    /// `x_0 ..= x_N`.
    pub states: Vec<f64>,
    pub actions: Vec<f64>,
    pub costs: Vec<f64>,
    pub total: f64,
    /// First time the heuristic played the Riccati feedback, if it did.
    pub switch_stage: Option<usize>,
}

/// One trajectory on stream `index` of `phase`.
pub fn simulate_lq(
    params: &LqParams,
    table: &RiccatiTable,
    rule: LqRule,
    phase: Phase,
    index: u64,
) -> LqTrajectory {
    let n_steps = params.horizon;
    let mut rng = stream_rng(params.seed, phase, index);
    let mut states = Vec::with_capacity(n_steps + 1);
    let mut actions = Vec::with_capacity(n_steps);
    let mut costs = Vec::with_capacity(n_steps);
    let mut x = params.x0;
    let mut budget = match rule {
        LqRule::Heuristic { budget } => budget,
        _ => 0.0,
    };
    let mut switch_stage = None;
    states.push(x);
    for n in 0..n_steps {
        let a = match rule {
            LqRule::Zero => 0.0,
            LqRule::Neutral => table.action(n, x),
            LqRule::Heuristic { .. } => {
                if switch_stage.is_none() && budget <= 0.0 {
                    switch_stage = Some(n);
                }
                if switch_stage.is_some() {
                    table.action(n, x)
                } else {
                    budget -= x * x;
                    0.0
                }
            }
        };
        let z: f64 = StandardNormal.sample(&mut rng);
        actions.push(a);
        costs.push(x * x + a * a);
        x = x + a + params.noise_std * z;
        states.push(x);
    }
    let total = costs.iter().sum();
    LqTrajectory {
        states,
        actions,
        costs,
        total,
        switch_stage,
    }
}

/// Total costs of trajectories `0..M` of `phase`, in index order.
pub fn sample_totals(
    params: &LqParams,
    table: &RiccatiTable,
    rule: LqRule,
    phase: Phase,
) -> Vec<f64> {
    (0..params.samples as u64)
        .into_par_iter()
        .map(|i| simulate_lq(params, table, rule, phase, i).total)
        .collect()
}

/// Empirical VaR of the total cost under the zero policy, from `M`
/// trajectories of the budget-estimation phase.
pub fn estimate_global_s(params: &LqParams) -> Result<f64> {
    params.validate()?;
    let table = riccati_recursion(params.horizon)?;
    let totals = sample_totals(params, &table, LqRule::Zero, Phase::BudgetEstimation);
    Ok(value_at_risk(&to_empirical(&totals)?, params.alpha))
}

/// A single heuristic trajectory started with budget `s0`, read from stream 0
/// of the evaluation phase of `seed`.
pub fn run_lq_avar_heuristic(params: &LqParams, s0: f64, seed: u64) -> Result<LqTrajectory> {
    params.validate()?;
    let table = riccati_recursion(params.horizon)?;
    let params = LqParams { seed, ..*params };
    Ok(simulate_lq(
        &params,
        &table,
        LqRule::Heuristic { budget: s0 },
        Phase::Evaluation,
        0,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub var: f64,
    pub avar: f64,
    /// Sample standard deviation over `sqrt(M)`.
    pub stderr_mean: f64,
    /// Batch-means standard errors over [`STDERR_BATCHES`] contiguous batches;
    /// NaN when fewer than two batches are available.
    pub stderr_var: f64,
    pub stderr_avar: f64,
}

/// Mean, VaR and AVaR of the total cost from `M` evaluation-phase
/// trajectories.
pub fn mc_evaluate_policy_avar(rule: LqRule, params: &LqParams) -> Result<McEstimate> {
    params.validate()?;
    let table = riccati_recursion(params.horizon)?;
    let totals = sample_totals(params, &table, rule, Phase::Evaluation);
    estimate_from_totals(&totals, params.alpha)
}

pub fn estimate_from_totals(totals: &[f64], alpha: RiskLevel) -> Result<McEstimate> {
    let whole = sample_risk(totals, alpha)?;
    let m = totals.len() as f64;
    let stderr_mean = if totals.len() > 1 {
        let ss: f64 = totals.iter().map(|t| (t - whole.mean).powi(2)).sum();
        (ss / (m - 1.0)).sqrt() / m.sqrt()
    } else {
        f64::NAN
    };

    let batches = STDERR_BATCHES.min(totals.len());
    let (stderr_var, stderr_avar) = if batches >= 2 {
        let mut vars = Vec::with_capacity(batches);
        let mut avars = Vec::with_capacity(batches);
        for b in 0..batches {
            let lo = b * totals.len() / batches;
            let hi = (b + 1) * totals.len() / batches;
            let r = sample_risk(&totals[lo..hi], alpha)?;
            vars.push(r.var);
            avars.push(r.avar);
        }
        (batch_stderr(&vars), batch_stderr(&avars))
    } else {
        (f64::NAN, f64::NAN)
    };

    Ok(McEstimate {
        mean: whole.mean,
        var: whole.var,
        avar: whole.avar,
        stderr_mean,
        stderr_var,
        stderr_avar,
    })
}

fn batch_stderr(stats: &[f64]) -> f64 {
    let b = stats.len() as f64;
    let mean = stats.iter().sum::<f64>() / b;
    let ss: f64 = stats.iter().map(|v| (v - mean).powi(2)).sum();
    (ss / (b - 1.0)).sqrt() / b.sqrt()
}
