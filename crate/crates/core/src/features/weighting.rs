use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::daily::DailySeries;

/// Weight of day `day` (0-based) in an `n_days` window. The query point is
/// the day after the last one, so the most recent day sits at distance 1.
pub fn time_weight(n_days: usize, day: usize) -> f64 {
    1.0 / (n_days - day) as f64
}

/// `sum_i W_i * x_i` with reciprocal-distance weights.
pub fn weighted_sum(values: &[f64]) -> f64 {
    let n = values.len();
    values.iter().enumerate().map(|(i, x)| time_weight(n, i) * x).sum()
}

/// Multiplies each day by its weight.
pub fn apply_time_weights(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    values.iter().enumerate().map(|(i, x)| time_weight(n, i) * x).collect()
}

pub fn time_weighted(series: &DailySeries) -> Vec<(String, f64)> {
    series
        .channels
        .iter()
        .zip(&series.values)
        .map(|(name, values)| (format!("tw.{name}"), weighted_sum(values)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn anchor_weights() {
        let mut x = [0.0; 56];
        x[55] = 3.0;
        assert_eq!(weighted_sum(&x), 3.0);
        let mut y = [0.0; 56];
        y[49] = 7.0;
        // Day 49 is seven days before the query day 56.
        assert_eq!(time_weight(56, 49), 1.0 / 7.0);
        assert!((weighted_sum(&y) - 1.0).abs() < 1e-15);
        assert_eq!(weighted_sum(&[0.0; 10]), 0.0);
    }

    #[test]
    fn weights_decrease_into_the_past() {
        for i in 1..56 {
            assert!(time_weight(56, i - 1) < time_weight(56, i));
        }
    }

    proptest! {
        #[test]
        fn bounded_by_plain_sum(xs in proptest::collection::vec(0.0f64..1e3, 1..60)) {
            let w = weighted_sum(&xs);
            prop_assert!(w >= 0.0);
            prop_assert!(w <= xs.iter().sum::<f64>() + 1e-9);
        }
    }
}
