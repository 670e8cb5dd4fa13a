use std::ops::Deref;

use crate::error::{Error, Result};

/// Tolerance on `sum(y) == 1` for a population on the simplex.
pub const SIMPLEX_TOL: f64 = 1e-9;

/// Task fractions on the probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationVector(Vec<f64>);

impl PopulationVector {
    pub fn new(y: Vec<f64>) -> Result<Self> {
        if y.len() < 2 {
            return Err(Error::Parameter(format!("population needs at least 2 tasks, got {}", y.len())));
        }
        if let Some((i, v)) = y.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Parameter(format!("fraction Y[{i}] = {v} must be finite and nonnegative")));
        }
        let sum: f64 = y.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::Parameter(format!("fractions sum to {sum}, expected 1")));
        }
        Ok(Self(y))
    }

    pub fn uniform(m: usize) -> Self {
        Self(vec![1.0 / m as f64; m])
    }

    /// All robots on task `k`.
    pub fn vertex(m: usize, k: usize) -> Self {
        let mut y = vec![0.0; m];
        y[k] = 1.0;
        Self(y)
    }

    /// Fractions `counts / sum(counts)`.
    pub fn from_counts(counts: &[u32]) -> Result<Self> {
        let n: u64 = counts.iter().map(|&c| u64::from(c)).sum();
        if n == 0 {
            return Err(Error::Parameter("counts sum to zero".into()));
        }
        Self::new(counts.iter().map(|&c| f64::from(c) / n as f64).collect())
    }

    /// Wraps a vector already known to lie on the simplex (up to rounding).
    pub(crate) fn from_vec_unchecked(y: Vec<f64>) -> Self {
        Self(y)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for PopulationVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for PopulationVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}
