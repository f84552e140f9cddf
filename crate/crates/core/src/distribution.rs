//! Finite discrete distributions of a scalar cost.

use serde::Serialize;

use crate::error::{Error, Result};

/// Atoms closer than this are merged into one.
pub const MERGE_TOLERANCE: f64 = 1e-12;

/// Slack allowed on the total probability mass.
pub const MASS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Atom {
    pub value: f64,
    pub probability: f64,
}

/// A cost law with finitely many atoms, kept in canonical form: values strictly
/// increasing, probabilities in `(0, 1]`, total mass 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostDistribution {
    atoms: Vec<Atom>,
}

impl CostDistribution {
    /// Builds a distribution from weighted values in any order. Zero-weight
    /// entries are dropped and values within [`MERGE_TOLERANCE`] are merged.
    pub fn new<I>(weighted: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let mut raw: Vec<(f64, f64)> = Vec::new();
        for (value, probability) in weighted {
            if !value.is_finite() || !probability.is_finite() {
                return Err(Error::InvalidDistribution(format!(
                    "non-finite atom ({value}, {probability})"
                )));
            }
            if probability < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "negative probability {probability} at value {value}"
                )));
            }
            if probability > 0.0 {
                raw.push((value, probability));
            }
        }
        if raw.is_empty() {
            return Err(Error::InvalidDistribution(
                "no atoms with positive mass".into(),
            ));
        }
        let mass: f64 = raw.iter().map(|&(_, p)| p).sum();
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {mass}"
            )));
        }
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut atoms: Vec<Atom> = Vec::with_capacity(raw.len());
        for (value, probability) in raw {
            match atoms.last_mut() {
                Some(last) if value - last.value <= MERGE_TOLERANCE => {
                    last.probability += probability;
                }
                _ => atoms.push(Atom { value, probability }),
            }
        }
        Ok(Self { atoms })
    }

    /// The law of a constant.
    pub fn point(value: f64) -> Self {
        Self {
            atoms: vec![Atom {
                value,
                probability: 1.0,
            }],
        }
    }

    /// Empirical law of a sample: each distinct value gets multiplicity / n.
    pub fn empirical(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySample);
        }
        let weight = 1.0 / samples.len() as f64;
        let mut sorted = samples.to_vec();
        if let Some(bad) = sorted.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidDistribution(format!(
                "non-finite sample {bad}"
            )));
        }
        sorted.sort_by(f64::total_cmp);

        // Count runs so repeated values keep exact multiplicity / n weights.
        let mut atoms: Vec<Atom> = Vec::new();
        let mut run_start = 0;
        for i in 1..=sorted.len() {
            if i == sorted.len() || sorted[i] - sorted[run_start] > MERGE_TOLERANCE {
                atoms.push(Atom {
                    value: sorted[run_start],
                    probability: (i - run_start) as f64 * weight,
                });
                run_start = i;
            }
        }
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|a| a.value * a.probability).sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.atoms
            .iter()
            .map(|a| a.probability * (a.value - mean).powi(2))
            .sum()
    }

    pub fn min(&self) -> f64 {
        self.atoms[0].value
    }

    pub fn max(&self) -> f64 {
        self.atoms[self.atoms.len() - 1].value
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.probability).sum()
    }

    /// `E[(X - s)^+]`.
    pub fn expected_excess(&self, s: f64) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.probability * (a.value - s).max(0.0))
            .sum()
    }

    /// Law of `f(X)` for a monotone or arbitrary map; atoms are re-canonicalised.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.atoms.iter().map(|a| (f(a.value), a.probability)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form_sorts_and_merges() {
        let d = CostDistribution::new([(2.0, 0.25), (1.0, 0.5), (2.0 + 1e-14, 0.25)]).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(
            d.atoms()[0],
            Atom {
                value: 1.0,
                probability: 0.5
            }
        );
        assert_eq!(d.atoms()[1].value, 2.0);
        assert!((d.atoms()[1].probability - 0.5).abs() < 1e-15);
    }

    #[test]
    fn empirical_examples() {
        let d = CostDistribution::empirical(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        let expect: Vec<_> = (1..=4)
            .map(|v| Atom {
                value: v as f64,
                probability: 0.25,
            })
            .collect();
        assert_eq!(d.atoms(), expect.as_slice());

        let d = CostDistribution::empirical(&[5.0, 5.0]).unwrap();
        assert_eq!(
            d.atoms(),
            &[Atom {
                value: 5.0,
                probability: 1.0
            }]
        );

        let d = CostDistribution::empirical(&[2.0, 1.0]).unwrap();
        assert_eq!(d.atoms()[0].value, 1.0);
        assert_eq!(d.atoms()[1].value, 2.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            CostDistribution::empirical(&[]),
            Err(Error::EmptySample)
        ));
        assert!(CostDistribution::new([(1.0, 0.5)]).is_err());
        assert!(CostDistribution::new([(1.0, -0.5), (2.0, 1.5)]).is_err());
        assert!(CostDistribution::new([(f64::NAN, 1.0)]).is_err());
    }

    #[test]
    fn moments() {
        let d = CostDistribution::new([(0.0, 0.9), (10.0, 0.1)]).unwrap();
        assert!((d.mean() - 1.0).abs() < 1e-15);
        assert!((d.variance() - 9.0).abs() < 1e-12);
        assert_eq!(d.expected_excess(10.0), 0.0);
        assert!((d.expected_excess(0.0) - 1.0).abs() < 1e-15);
    }
}
