use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::daily::DailySeries;
use super::overall::{mean, pop_std};
use crate::linalg::polyfit;

/// Number of most recent weekly sums emitted per channel.
pub const RECENT_WEEKS: usize = 4;

/// Shape statistics of one channel's weekly sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeeklyTrend {
    pub cv: f64,
    pub lin_intercept: f64,
    pub lin_slope: f64,
    pub quad: [f64; 3],
    /// True when fewer weeks than coefficients forced a lower-degree fit.
    pub degree_reduced: bool,
}

/// Sums a daily channel into whole weeks (trailing partial days are dropped).
pub fn weekly_sums(daily: &[f64]) -> Vec<f64> {
    daily.chunks_exact(7).map(|w| w.iter().sum()).collect()
}

/// Coefficient of variation (population std over mean, 0 for a zero mean) and
/// least-squares degree-1 and degree-2 fits over `(week index, sum)`.
pub fn weekly_trend(sums: &[f64]) -> WeeklyTrend {
    let m = mean(sums);
    let cv = if m == 0.0 { 0.0 } else { pop_std(sums) / m };
    let xs: Vec<f64> = (0..sums.len()).map(|i| i as f64).collect();
    let mut degree_reduced = false;
    let (lin_intercept, lin_slope) = match polyfit(&xs, sums, 1) {
        Ok(c) => (c[0], c[1]),
        Err(_) => {
            degree_reduced = true;
            (m, 0.0)
        }
    };
    let quad = match polyfit(&xs, sums, 2) {
        Ok(c) => [c[0], c[1], c[2]],
        Err(_) => {
            degree_reduced = true;
            [lin_intercept, lin_slope, 0.0]
        }
    };
    WeeklyTrend { cv, lin_intercept, lin_slope, quad, degree_reduced }
}

/// Weekly features per channel, named `weekly.<channel>.<stat>`. The series
/// must start on a week boundary.
pub fn weekly_features(series: &DailySeries) -> Vec<(String, f64)> {
    let mut out = Vec::new();
    for (name, values) in series.channels.iter().zip(&series.values) {
        let sums = weekly_sums(values);
        let t = weekly_trend(&sums);
        for back in 0..RECENT_WEEKS {
            let v = sums.len().checked_sub(back + 1).map_or(0.0, |i| sums[i]);
            out.push((format!("weekly.{name}.sum_last{}", back + 1), v));
        }
        out.push((format!("weekly.{name}.cv"), t.cv));
        out.push((format!("weekly.{name}.lin_intercept"), t.lin_intercept));
        out.push((format!("weekly.{name}.lin_slope"), t.lin_slope));
        out.push((format!("weekly.{name}.quad_c0"), t.quad[0]));
        out.push((format!("weekly.{name}.quad_c1"), t.quad[1]));
        out.push((format!("weekly.{name}.quad_c2"), t.quad[2]));
    }
    out
}
