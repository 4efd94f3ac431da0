//! Probability and sub-probability vectors.

use crate::error::{Error, Result};

/// Tolerance on `Σ p = 1` accepted on ingestion.
pub const INPUT_SUM_TOL: f64 = 1e-6;
/// Slack allowed above 1 for a sub-probability vector.
pub const SUB_SUM_SLACK: f64 = 1e-9;
/// A sub-probability vector whose mass is within this of 1 is already on the
/// simplex and renormalizes to itself.
pub const ON_SIMPLEX_TOL: f64 = 1e-12;

/// A dense probability vector over `V >= 1` outcomes.
///
/// Construction rescales by the sum so the stored entries sum to 1 up to
/// rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector {
    probs: Vec<f64>,
}

impl ProbVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Input("probability vector is empty".into()));
        }
        if let Some((i, v)) = probs
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0 || **v > 1.0)
        {
            return Err(Error::Input(format!("entry {i} = {v} is not in [0, 1]")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > INPUT_SUM_TOL {
            return Err(Error::Input(format!(
                "entries sum to {sum}, not 1 within {INPUT_SUM_TOL}"
            )));
        }
        let probs = if sum == 1.0 {
            probs
        } else {
            probs.into_iter().map(|v| v / sum).collect()
        };
        Ok(Self { probs })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }
}

/// `k >= 1` entries in `[0, 1]` with total mass at most 1 and at least one
/// positive entry: the input of a renormalization map.
#[derive(Debug, Clone, PartialEq)]
pub struct SubProbVector {
    entries: Vec<f64>,
    sum: f64,
}

impl SubProbVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Input("sub-probability vector is empty".into()));
        }
        if let Some((i, v)) = entries
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0 || **v > 1.0)
        {
            return Err(Error::Input(format!("entry {i} = {v} is not in [0, 1]")));
        }
        let sum: f64 = entries.iter().sum();
        if sum > 1.0 + SUB_SUM_SLACK {
            return Err(Error::Input(format!("entries sum to {sum} > 1")));
        }
        if sum <= 0.0 {
            return Err(Error::Input("all entries are zero".into()));
        }
        Ok(Self { entries, sum })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn sum(&self) -> f64 {
        self.sum
    }

    pub fn max(&self) -> f64 {
        self.entries.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_on_simplex(&self) -> bool {
        self.sum >= 1.0 - ON_SIMPLEX_TOL
    }
}

/// Output of a renormalization map together with its Lagrange multiplier.
#[derive(Debug, Clone, PartialEq)]
pub struct RenormResult {
    pub probs: Vec<f64>,
    pub nu: f64,
}

impl RenormResult {
    pub(crate) fn identity(x: &SubProbVector) -> Self {
        Self {
            probs: x.entries.clone(),
            nu: 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prob_vector_rescales_small_noise() {
        let p = ProbVector::new(vec![0.5, 0.5 + 5e-7]).unwrap();
        let s: f64 = p.as_slice().iter().sum();
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn prob_vector_rejects_junk() {
        assert!(ProbVector::new(vec![]).is_err());
        assert!(ProbVector::new(vec![0.5, 0.6]).is_err());
        assert!(ProbVector::new(vec![f64::NAN, 1.0]).is_err());
        assert!(ProbVector::new(vec![-0.1, 1.1]).is_err());
        assert_eq!(ProbVector::new(vec![0.3]).unwrap_err().name(), "InputError");
    }

    #[test]
    fn sub_prob_vector_invariants() {
        assert!(SubProbVector::new(vec![0.0, 0.0]).is_err());
        assert!(SubProbVector::new(vec![0.7, 0.4]).is_err());
        assert!(SubProbVector::new(vec![1.0 + 1e-12]).is_err());
        let x = SubProbVector::new(vec![0.5, 0.25]).unwrap();
        assert_eq!(x.sum(), 0.75);
        assert_eq!(x.max(), 0.5);
        assert!(!x.is_on_simplex());
        assert!(SubProbVector::new(vec![0.7, 0.3]).unwrap().is_on_simplex());
    }
}
