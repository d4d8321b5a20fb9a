//! Single-pass running mean/variance.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("sample variance needs at least 2 observations, got {0}")]
    TooFewSamples(u64),
}

/// Welford accumulator: count, running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RunningVariance {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl RunningVariance {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, value: f64) {
        *self = welford_update(*self, value);
    }

    /// Unbiased sample variance, `m2 / (count - 1)`.
    pub fn sample_variance(&self) -> Result<f64, StatsError> {
        if self.count < 2 {
            return Err(StatsError::TooFewSamples(self.count));
        }
        Ok(self.m2 / (self.count - 1) as f64)
    }
}

impl Extend<f64> for RunningVariance {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for v in iter {
            self.push(v);
        }
    }
}

impl FromIterator<f64> for RunningVariance {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        acc.extend(iter);
        acc
    }
}

pub fn welford_update(state: RunningVariance, value: f64) -> RunningVariance {
    let count = state.count + 1;
    let delta = value - state.mean;
    let mean = state.mean + delta / count as f64;
    let m2 = state.m2 + delta * (value - mean);
    RunningVariance { count, mean, m2 }
}
