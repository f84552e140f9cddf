//! Value-at-Risk and Average-Value-at-Risk of finite cost distributions.
//!
//! For a cost `X` with left-continuous quantile function `q`,
//!
//! ```text
//! VaR_α(X)  = inf { x : P(X <= x) >= α }
//! AVaR_α(X) = 1/(1-α) ∫_α^1 q(t) dt
//!           = min_s { s + E[(X - s)^+] / (1-α) }      (attained at s = VaR_α)
//! ```
//!
//! On a finite support `q` is a step function, so both the integral and the
//! minimisation have closed forms.

use serde::Serialize;

use crate::distribution::CostDistribution;
use crate::error::{Error, Result};
use crate::select::tie_tolerance;

/// Slack on cumulative-probability comparisons.
pub const CDF_TOLERANCE: f64 = 1e-12;

/// Confidence level `α`, strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct RiskLevel(f64);

impl RiskLevel {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha < 1.0 {
            Ok(Self(alpha))
        } else {
            Err(Error::InvalidRiskLevel(alpha))
        }
    }

    pub fn alpha(self) -> f64 {
        self.0
    }

    /// `1 / (1 - α)`.
    pub fn tail_weight(self) -> f64 {
        1.0 / (1.0 - self.0)
    }
}

impl TryFrom<f64> for RiskLevel {
    type Error = Error;

    fn try_from(alpha: f64) -> Result<Self> {
        Self::new(alpha)
    }
}

/// Empirical distribution of a sample.
pub fn to_empirical(samples: &[f64]) -> Result<CostDistribution> {
    CostDistribution::empirical(samples)
}

pub fn expectation(dist: &CostDistribution) -> f64 {
    dist.mean()
}

/// Essential supremum, the `α → 1` limit of AVaR.
pub fn worst_case(dist: &CostDistribution) -> f64 {
    dist.max()
}

/// Smallest atom whose cumulative probability reaches `α`.
pub fn value_at_risk(dist: &CostDistribution, level: RiskLevel) -> f64 {
    let alpha = level.alpha();
    let mut cumulative = 0.0;
    for atom in dist.atoms() {
        cumulative += atom.probability;
        if cumulative >= alpha - CDF_TOLERANCE {
            return atom.value;
        }
    }
    dist.max()
}

/// Exact quantile integral `1/(1-α) ∫_α^1 VaR_t dt`.
pub fn average_value_at_risk(dist: &CostDistribution, level: RiskLevel) -> f64 {
    upper_tail_mean(dist, level.alpha())
}

/// Quantile-integral form for any `α ∈ [0, 1)`; at `α = 0` this is the mean.
/// Panics outside that range.
pub fn upper_tail_mean(dist: &CostDistribution, alpha: f64) -> f64 {
    assert!((0.0..1.0).contains(&alpha), "alpha {alpha} outside [0, 1)");
    let atoms = dist.atoms();
    let last = atoms.len() - 1;
    let mut lower = 0.0;
    let mut integral = 0.0;
    for (i, atom) in atoms.iter().enumerate() {
        // Pin the final breakpoint to 1 so rounding in the mass cannot leak.
        let upper = if i == last {
            1.0
        } else {
            lower + atom.probability
        };
        let overlap = upper - lower.max(alpha);
        if overlap > 0.0 {
            integral += atom.value * overlap;
        }
        lower = upper;
    }
    integral / (1.0 - alpha)
}

/// `s + E[(X - s)^+] / (1 - α)`.
pub fn rockafellar_objective(dist: &CostDistribution, s: f64, level: RiskLevel) -> f64 {
    s + level.tail_weight() * dist.expected_excess(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Minimizer {
    pub s_star: f64,
    pub value: f64,
}

/// Minimises [`rockafellar_objective`] over the atoms. The objective is
/// piecewise linear with breakpoints at the atoms, so this is exact. The
/// smallest minimising atom is reported.
pub fn avar_via_minimization(dist: &CostDistribution, level: RiskLevel) -> Minimizer {
    let values: Vec<f64> = dist
        .atoms()
        .iter()
        .map(|a| rockafellar_objective(dist, a.value, level))
        .collect();
    let best = values.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = tie_tolerance(best);
    let (i, &value) = values
        .iter()
        .enumerate()
        .find(|&(_, &v)| v <= best + tol)
        .expect("distribution has at least one atom");
    Minimizer {
        s_star: dist.atoms()[i].value,
        value,
    }
}

/// VaR, AVaR and mean of a sample in one pass over its empirical law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleRisk {
    pub alpha: f64,
    pub count: usize,
    pub mean: f64,
    pub var: f64,
    pub avar: f64,
}

pub fn sample_risk(samples: &[f64], level: RiskLevel) -> Result<SampleRisk> {
    let dist = to_empirical(samples)?;
    Ok(SampleRisk {
        alpha: level.alpha(),
        count: samples.len(),
        mean: dist.mean(),
        var: value_at_risk(&dist, level),
        avar: average_value_at_risk(&dist, level),
    })
}
