use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::event::EventCatalog;
use crate::labeling::WindowLayout;
use crate::time::SECONDS_PER_DAY;
use crate::timeline::PlayerTimeline;

pub const SESSION_COUNT: &str = "session_count";
pub const PLAYTIME_MINUTES: &str = "playtime_minutes";
pub const LAST_LEVEL: &str = "last_level";
pub const LEVEL_UPS: &str = "level_ups";
pub const TARGET_LEVEL: &str = "target_level";
pub const DISTINCT_CHARS: &str = "distinct_chars";
pub const MONEY_EARNED: &str = "money_earned";
pub const MONEY_SPENT: &str = "money_spent";
pub const EQUIP_SCORE: &str = "equip_score";

const FIXED_CHANNELS: [&str; 9] = [
    SESSION_COUNT,
    PLAYTIME_MINUTES,
    LAST_LEVEL,
    LEVEL_UPS,
    TARGET_LEVEL,
    DISTINCT_CHARS,
    MONEY_EARNED,
    MONEY_SPENT,
    EQUIP_SCORE,
];

/// Channel names for a catalog: one `action_<group>` per group, then the
/// fixed activity channels.
pub fn channel_names(catalog: &EventCatalog) -> Vec<String> {
    let mut names: Vec<String> = catalog.groups().iter().map(|g| format!("action_{g}")).collect();
    names.extend(FIXED_CHANNELS.iter().map(|s| String::from(*s)));
    names
}

/// Per-day activity channels over the observation window, one value per day.
#[derive(Debug, Clone, PartialEq)]
pub struct DailySeries {
    pub account_id: String,
    /// Grid day index of the first column.
    pub first_day: i64,
    pub channels: Vec<String>,
    /// `values[channel][day]`.
    pub values: Vec<Vec<f64>>,
}

impl DailySeries {
    pub fn n_days(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.channels.iter().position(|c| c == name).map(|i| self.values[i].as_slice())
    }
}

pub fn daily_series(timeline: &PlayerTimeline, layout: &WindowLayout, catalog: &EventCatalog) -> DailySeries {
    let channels = channel_names(catalog);
    let n_days = layout.observation_days();
    let first_day = layout.first_observation_day();
    let mut values = vec![vec![0.0; n_days]; channels.len()];
    let idx = |name: &str| channels.iter().position(|c| c == name).expect("fixed channel");
    let group_idx: BTreeMap<String, usize> = catalog.groups().into_iter().enumerate().map(|(i, g)| (g, i)).collect();
    let (sessions_c, play_c, last_lvl_c, ups_c, target_c, chars_c, earn_c, spend_c, equip_c) = (
        idx(SESSION_COUNT),
        idx(PLAYTIME_MINUTES),
        idx(LAST_LEVEL),
        idx(LEVEL_UPS),
        idx(TARGET_LEVEL),
        idx(DISTINCT_CHARS),
        idx(MONEY_EARNED),
        idx(MONEY_SPENT),
        idx(EQUIP_SCORE),
    );

    let observed = timeline.restricted(layout.observation.start, layout.observation.end);
    let grid = &layout.grid;
    let day_of = |t| (grid.day_index(t) - first_day) as usize;

    let mut target: Vec<Option<f64>> = vec![None; n_days];
    let mut equip: Vec<Option<f64>> = vec![None; n_days];
    let mut chars: Vec<BTreeSet<&str>> = vec![BTreeSet::new(); n_days];
    let mut prev_level: BTreeMap<&str, u32> = BTreeMap::new();

    for e in observed.events() {
        let d = day_of(e.timestamp);
        if let Some(&g) = group_idx.get(catalog.group_of(e.log_id)) {
            values[g][d] += 1.0;
        }
        if let Some(level) = e.actor_level {
            values[last_lvl_c][d] = f64::from(level);
            if let Some(prev) = prev_level.insert(e.char_id.as_str(), level) {
                if level > prev {
                    values[ups_c][d] += f64::from(level - prev);
                }
            }
        }
        if let Some(t) = e.target_level {
            let t = f64::from(t);
            target[d] = Some(target[d].map_or(t, |cur: f64| cur.max(t)));
        }
        if let Some(score) = e.equip_score {
            equip[d] = Some(equip[d].map_or(score, |cur: f64| cur.max(score)));
        }
        if !e.char_id.is_empty() {
            chars[d].insert(e.char_id.as_str());
        }
        match e.money_delta {
            Some(m) if m > 0 => values[earn_c][d] += m as f64,
            Some(m) if m < 0 => values[spend_c][d] += m.unsigned_abs() as f64,
            _ => {}
        }
    }

    for (d, set) in chars.iter().enumerate() {
        values[chars_c][d] = set.len() as f64;
    }
    carry_forward(&target, &mut values[target_c]);
    carry_forward(&equip, &mut values[equip_c]);

    for s in observed.sessions() {
        values[sessions_c][day_of(s.start)] += 1.0;
        // Split playtime at day boundaries.
        let mut start = s.start;
        while start < s.end {
            let d = day_of(start);
            let day_end = grid.day_start(first_day + d as i64 + 1).min(s.end);
            values[play_c][d] += (day_end - start) as f64 / 60.0;
            start = day_end;
        }
    }
    debug_assert!(values[play_c].iter().sum::<f64>() * 60.0 <= (n_days as i64 * SECONDS_PER_DAY) as f64);

    DailySeries { account_id: String::from(timeline.account_id()), first_day, channels, values }
}

fn carry_forward(observed: &[Option<f64>], out: &mut [f64]) {
    let mut last = 0.0;
    for (slot, v) in out.iter_mut().zip(observed) {
        if let Some(v) = v {
            last = *v;
        }
        *slot = last;
    }
}
