use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Empirical mid-rank quantile transform fit on training values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileMap {
    sorted: Vec<f64>,
}

impl QuantileMap {
    pub fn fit(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Validation("cannot fit a quantile map on an empty column".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("quantile map training values must be finite".into()));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(QuantileMap { sorted })
    }

    /// `(count_less + count_equal / 2) / n` against the training sample.
    pub fn apply(&self, x: f64) -> f64 {
        let less = self.sorted.partition_point(|v| *v < x);
        let less_or_equal = self.sorted.partition_point(|v| *v <= x);
        let equal = less_or_equal - less;
        (less as f64 + 0.5 * equal as f64) / self.sorted.len() as f64
    }

    pub fn sorted_values(&self) -> &[f64] {
        &self.sorted
    }
}
