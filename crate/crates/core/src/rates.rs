use std::ops::Index;

use crate::error::{Error, Result};
use crate::graph::ClassSet;

/// Tolerance used to decide that an input vector already sums to one.
pub const NORMALIZED_TOLERANCE: f64 = 1e-9;

/// Per-class arrival rates, normalized to sum to one. Zero entries are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct RateVector(Vec<f64>);

impl RateVector {
    /// Rescales a nonnegative vector with at least one positive entry so that
    /// it sums to one.
    pub fn new(raw: Vec<f64>) -> Result<Self> {
        let total = Self::validate(&raw)?;
        if (total - 1.0).abs() <= f64::EPSILON {
            return Ok(RateVector(raw));
        }
        Ok(RateVector(raw.into_iter().map(|a| a / total).collect()))
    }

    /// Takes a vector whose entries already sum to one (within
    /// [`NORMALIZED_TOLERANCE`]) without rescaling it.
    pub fn from_normalized(raw: Vec<f64>) -> Result<Self> {
        let total = Self::validate(&raw)?;
        if (total - 1.0).abs() > NORMALIZED_TOLERANCE {
            return Err(Error::InvalidRates(format!(
                "rates sum to {total}, expected 1"
            )));
        }
        Ok(RateVector(raw))
    }

    pub fn uniform(n: usize) -> Self {
        RateVector(vec![1.0 / n as f64; n])
    }

    fn validate(raw: &[f64]) -> Result<f64> {
        if raw.is_empty() {
            return Err(Error::InvalidRates("empty rate vector".into()));
        }
        if let Some((i, a)) = raw
            .iter()
            .enumerate()
            .find(|(_, a)| !a.is_finite() || **a < 0.0)
        {
            return Err(Error::InvalidRates(format!(
                "rate of class {} is {a}, expected a finite nonnegative value",
                i + 1
            )));
        }
        let total: f64 = raw.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidRates("all rates are zero".into()));
        }
        Ok(total)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// `α(A)`.
    pub fn of(&self, set: ClassSet) -> f64 {
        set.sum(&self.0)
    }

    /// Classes with a positive rate.
    pub fn support(&self) -> ClassSet {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    /// ℓ∞ distance to another vector of the same length.
    pub fn max_abs_diff(&self, other: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Index<usize> for RateVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}
