use alloc::format;
use alloc::string::{String, ToString};
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use super::WindowLayout;
use crate::error::{Error, Result};
use crate::time::Timestamp;
use crate::timeline::PlayerTimeline;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChurnLabel {
    pub account_id: String,
    pub churned: bool,
}

/// Survival time in calendar days. Censored labels render as `N+`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurvivalLabel {
    pub survival_days: u32,
    pub censored: bool,
}

impl fmt::Display for SurvivalLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.censored {
            write!(f, "{}+", self.survival_days)
        } else {
            write!(f, "{}", self.survival_days)
        }
    }
}

impl FromStr for SurvivalLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (digits, censored) = match s.strip_suffix('+') {
            Some(d) => (d, true),
            None => (s, false),
        };
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::Format(format!("invalid survival value {s:?}")));
        }
        let survival_days = digits.parse().map_err(|_| Error::Format(format!("survival value {s:?} out of range")))?;
        Ok(SurvivalLabel { survival_days, censored })
    }
}

fn require_observed(timeline: &PlayerTimeline, layout: &WindowLayout) -> Result<Timestamp> {
    timeline
        .events_in(layout.observation.start, layout.observation.end)
        .last()
        .map(|e| e.timestamp)
        .ok_or_else(|| Error::NotCohortMember(timeline.account_id().to_string()))
}

/// Churned iff the player has no event inside the churning window. Events in
/// the gap are ignored.
pub fn label_churn(timeline: &PlayerTimeline, layout: &WindowLayout) -> Result<ChurnLabel> {
    require_observed(timeline, layout)?;
    let in_window = timeline.events_in(layout.churn_window.start, layout.churn_window.end);
    Ok(ChurnLabel { account_id: timeline.account_id().to_string(), churned: in_window.is_empty() })
}

/// Calendar days from the last observation-window event to the most recent
/// event at or before `evaluation`. The label is censored when the history
/// holds any event at or after `evaluation - censor_margin_secs`.
pub fn label_survival(
    timeline: &PlayerTimeline,
    layout: &WindowLayout,
    evaluation: Timestamp,
    full_history: Option<&PlayerTimeline>,
    censor_margin_secs: i64,
) -> Result<SurvivalLabel> {
    if evaluation < layout.observation.end {
        return Err(Error::Window(format!(
            "evaluation instant {evaluation} precedes the observation end {}",
            layout.observation.end
        )));
    }
    let last_observed = require_observed(timeline, layout)?;
    let history = full_history.unwrap_or(timeline);
    let events = history.events();
    let known = events.partition_point(|e| e.timestamp <= evaluation);
    let most_recent = events[..known].last().map_or(last_observed, |e| e.timestamp.max(last_observed));
    let grid = &layout.grid;
    let survival_days = (grid.day_index(most_recent) - grid.day_index(last_observed)) as u32;
    let censor_from = evaluation + (-censor_margin_secs);
    let censored = events.last().is_some_and(|e| e.timestamp >= censor_from);
    Ok(SurvivalLabel { survival_days, censored })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::{Event, LogId};
    use crate::labeling::make_layout;
    use crate::time::{WeekGrid, DEFAULT_EPOCH, SECONDS_PER_DAY};
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn layout() -> WindowLayout {
        let grid = WeekGrid::starting_at(DEFAULT_EPOCH, 30).unwrap();
        make_layout(grid, DEFAULT_EPOCH, 6, 3, 5).unwrap()
    }

    fn timeline(days: &[f64]) -> PlayerTimeline {
        let events = days
            .iter()
            .map(|d| Event::bare("p", LogId(0), DEFAULT_EPOCH + (d * SECONDS_PER_DAY as f64) as i64))
            .collect();
        PlayerTimeline::new("p", events, layout().grid, 15)
    }

    #[test]
    fn observation_only_is_churn() {
        assert!(label_churn(&timeline(&[1.0, 20.0]), &layout()).unwrap().churned);
    }

    #[test]
    fn churn_window_event_means_retained() {
        // Churn window is days [63, 98).
        assert!(!label_churn(&timeline(&[1.0, 70.5]), &layout()).unwrap().churned);
    }

    #[test]
    fn gap_activity_does_not_count() {
        assert!(label_churn(&timeline(&[1.0, 45.0, 60.0]), &layout()).unwrap().churned);
    }

    #[test]
    fn no_observation_activity_is_error() {
        let err = label_churn(&timeline(&[50.0]), &layout()).unwrap_err();
        assert_eq!(err.kind(), "not_cohort_member");
    }

    #[test]
    fn censored_survival_renders_plus() {
        let l = layout();
        let eval = DEFAULT_EPOCH.plus_days(110);
        let obs = timeline(&[0.5]);
        let full = timeline(&[0.5, 103.2, 110.1]);
        let label = label_survival(&obs, &l, eval, Some(&full), 0).unwrap();
        assert_eq!(label, SurvivalLabel { survival_days: 103, censored: true });
        assert_eq!(label.to_string(), "103+");
    }

    #[test]
    fn last_observation_is_last_ever() {
        let l = layout();
        let t = timeline(&[3.0, 30.0]);
        let label = label_survival(&t, &l, l.default_evaluation(), None, 0).unwrap();
        assert_eq!(label, SurvivalLabel { survival_days: 0, censored: false });
        assert_eq!(label.to_string(), "0");
    }

    #[test]
    fn uncensored_day_difference() {
        let grid = WeekGrid::starting_at(DEFAULT_EPOCH, 30).unwrap();
        let l = make_layout(grid, DEFAULT_EPOCH, 2, 3, 5).unwrap();
        let full = timeline(&[2.0, 10.25, 24.9]);
        let obs = full.restricted(l.observation.start, l.observation.end);
        let label = label_survival(&obs, &l, l.default_evaluation(), Some(&full), 0).unwrap();
        assert_eq!(label, SurvivalLabel { survival_days: 14, censored: false });
    }

    #[test]
    fn evaluation_before_observation_end_rejected() {
        let l = layout();
        let err = label_survival(&timeline(&[1.0]), &l, DEFAULT_EPOCH.plus_days(10), None, 0).unwrap_err();
        assert_eq!(err.kind(), "window_error");
    }

    #[test]
    fn survival_label_text_roundtrip() {
        for s in ["0", "103+", "7"] {
            assert_eq!(s.parse::<SurvivalLabel>().unwrap().to_string(), s);
        }
        for bad in ["", "+", "-3", "1.5", "12++"] {
            assert!(bad.parse::<SurvivalLabel>().is_err(), "{bad}");
        }
    }

    proptest! {
        #[test]
        fn gap_events_never_flip_churn(obs in proptest::collection::vec(0.0f64..42.0, 1..10),
                                       churn in proptest::collection::vec(63.0f64..98.0, 0..3),
                                       gap in proptest::collection::vec(42.0f64..63.0, 0..10)) {
            let l = layout();
            let base: Vec<f64> = obs.iter().chain(churn.iter()).copied().collect();
            let with_gap: Vec<f64> = base.iter().chain(gap.iter()).copied().collect();
            prop_assert_eq!(label_churn(&timeline(&base), &l).unwrap().churned,
                            label_churn(&timeline(&with_gap), &l).unwrap().churned);
        }

        #[test]
        fn churn_window_event_only_unflips(obs in proptest::collection::vec(0.0f64..98.0, 1..10), extra in 63.0f64..98.0) {
            let l = layout();
            let mut days = obs.clone();
            days.push(1.0);
            let before = label_churn(&timeline(&days), &l).unwrap().churned;
            days.push(extra);
            let after = label_churn(&timeline(&days), &l).unwrap().churned;
            prop_assert!(!(after && !before));
            prop_assert!(!after);
        }

        #[test]
        fn uncensored_survival_matches_scan(days in proptest::collection::vec(0.0f64..98.0, 1..20)) {
            let l = layout();
            let mut days = days;
            days.push(0.25);
            let full = timeline(&days);
            let obs = full.restricted(l.observation.start, l.observation.end);
            let label = label_survival(&obs, &l, l.default_evaluation(), Some(&full), 0).unwrap();
            prop_assert!(!label.censored);
            // Oracle: whole-day distance between the latest event overall and
            // the latest observation event, scanned from raw second offsets.
            let secs: Vec<i64> = days.iter().map(|d| (d * SECONDS_PER_DAY as f64) as i64).collect();
            let obs_end = 42 * SECONDS_PER_DAY;
            let last_obs = secs.iter().copied().filter(|s| *s < obs_end).max().unwrap();
            let last_all = secs.iter().copied().max().unwrap();
            let expected = last_all / SECONDS_PER_DAY - last_obs / SECONDS_PER_DAY;
            prop_assert_eq!(i64::from(label.survival_days), expected);
        }
    }
}
