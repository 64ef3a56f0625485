use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::daily::DailySeries;
use crate::labeling::WindowLayout;
use crate::time::{WeekGrid, SECONDS_PER_DAY, WEEKDAY_NAMES};
use crate::timeline::PlayerTimeline;

/// Prefix of the per-channel mean/std/sum statistics.
pub const STAT_PREFIX: &str = "stat.";
/// Prefix of every other whole-window feature.
pub const OVERALL_PREFIX: &str = "overall.";

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Population standard deviation.
pub fn pop_std(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let m = mean(xs);
    libm::sqrt(xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64)
}

/// Active days divided by the inclusive span between first and last active
/// day. One active day gives 1, none gives 0.
pub fn loyalty_index(active_days: &BTreeSet<i64>) -> f64 {
    match (active_days.first(), active_days.last()) {
        (Some(first), Some(last)) => active_days.len() as f64 / (last - first + 1) as f64,
        _ => 0.0,
    }
}

/// Whole-window features: per-channel statistics (`stat.` prefix) and the
/// remaining overall features (`overall.` prefix).
pub fn overall_features(series: &DailySeries, timeline: &PlayerTimeline, layout: &WindowLayout) -> Vec<(String, f64)> {
    let mut out = Vec::new();
    let n = series.n_days();
    let edge = n.min(3);
    for (name, values) in series.channels.iter().zip(&series.values) {
        out.push((format!("{STAT_PREFIX}{name}.mean"), mean(values)));
        out.push((format!("{STAT_PREFIX}{name}.std"), pop_std(values)));
        out.push((format!("{STAT_PREFIX}{name}.sum"), values.iter().sum()));
        let first: f64 = values[..edge].iter().sum();
        let last: f64 = values[n - edge..].iter().sum();
        out.push((format!("{OVERALL_PREFIX}{name}.first3_minus_last3"), first - last));
    }

    let observed = timeline.restricted(layout.observation.start, layout.observation.end);
    let events = observed.events();
    out.push((format!("{OVERALL_PREFIX}loyalty_index"), loyalty_index(observed.active_days())));
    out.push((format!("{OVERALL_PREFIX}active_days"), observed.active_days().len() as f64));

    let guilds: BTreeSet<&str> = events.iter().filter_map(|e| e.guild_id.as_deref()).collect();
    out.push((format!("{OVERALL_PREFIX}guild_count"), guilds.len() as f64));
    let chars: BTreeSet<&str> = events.iter().map(|e| e.char_id.as_str()).filter(|c| !c.is_empty()).collect();
    out.push((format!("{OVERALL_PREFIX}distinct_chars_total"), chars.len() as f64));

    let mut weekday = [0.0f64; 7];
    for e in events {
        weekday[WeekGrid::weekday_offset(layout.grid.day_index(e.timestamp))] += 1.0;
    }
    let total: f64 = weekday.iter().sum();
    for (i, count) in weekday.iter().enumerate() {
        let share = if total > 0.0 { count / total } else { 0.0 };
        out.push((format!("{OVERALL_PREFIX}weekday_share.{i}_{}", WEEKDAY_NAMES[i]), share));
    }

    // Session timing: inter-session gaps and current absence.
    let sessions = observed.sessions();
    let gaps: Vec<f64> = sessions.windows(2).map(|w| (w[1].start - w[0].end) as f64 / 3600.0).collect();
    out.push((format!("{OVERALL_PREFIX}session_gap_mean_hours"), mean(&gaps)));
    out.push((format!("{OVERALL_PREFIX}session_gap_max_hours"), gaps.iter().copied().fold(0.0, f64::max)));
    let absence = match observed.last_timestamp() {
        Some(t) => (layout.observation.end - t) as f64 / SECONDS_PER_DAY as f64,
        None => n as f64,
    };
    out.push((format!("{OVERALL_PREFIX}absence_days"), absence));
    out
}
