//! Feature extraction over the observation window: daily channels, whole
//! window statistics, weekly trends, reciprocal time weights, dominant
//! frequency and quantile linearization.

mod daily;
mod matrix;
mod overall;
mod quantile;
mod spectrum;
mod weekly;
mod weighting;

pub use daily::{channel_names, daily_series, DailySeries};
pub use matrix::{
    account_features, build_matrix, finish_matrix, parse_families, schema_diff, Family, FeatureMatrix, Quantile,
    QuantileTransform,
};
pub use overall::{loyalty_index, mean, overall_features, pop_std};
pub use quantile::QuantileMap;
pub use spectrum::dominant_frequency;
pub use weekly::{weekly_features, weekly_sums, weekly_trend, WeeklyTrend, RECENT_WEEKS};
pub use weighting::{apply_time_weights, time_weight, time_weighted, weighted_sum};
