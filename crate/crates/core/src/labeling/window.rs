use alloc::format;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time::{Timestamp, WeekGrid};

/// Weeks between the end of observed data and the churning window.
pub const DEFAULT_GAP_WEEKS: u32 = 3;
/// Length of the churning window in weeks.
pub const DEFAULT_CHURN_WEEKS: u32 = 5;

/// Half-open `[start, end)` interval of UTC instants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub start: Timestamp,
    pub end: Timestamp,
}

impl Interval {
    pub fn contains(&self, t: Timestamp) -> bool {
        self.start <= t && t < self.end
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }

    pub fn len_secs(&self) -> i64 {
        self.end - self.start
    }
}

/// Observation window, prediction gap and churning window, contiguous and in
/// that order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowLayout {
    pub observation: Interval,
    pub gap: Interval,
    pub churn_window: Interval,
    pub grid: WeekGrid,
}

impl WindowLayout {
    pub fn observation_weeks(&self) -> u32 {
        (self.observation.len_secs() / crate::time::SECONDS_PER_WEEK) as u32
    }

    pub fn observation_days(&self) -> usize {
        (self.observation.len_secs() / crate::time::SECONDS_PER_DAY) as usize
    }

    /// Grid day index of the first observation day.
    pub fn first_observation_day(&self) -> i64 {
        self.grid.day_index(self.observation.start)
    }

    /// Default evaluation instant for survival: the end of the churning window.
    pub fn default_evaluation(&self) -> Timestamp {
        self.churn_window.end
    }
}

pub fn make_layout(
    grid: WeekGrid,
    observation_start: Timestamp,
    observation_weeks: u32,
    gap_weeks: u32,
    churn_weeks: u32,
) -> Result<WindowLayout> {
    if !grid.is_week_boundary(observation_start) {
        return Err(Error::Alignment(format!("observation start {observation_start} is not on a week boundary")));
    }
    if observation_weeks == 0 {
        return Err(Error::Config("observation_weeks must be positive".into()));
    }
    if churn_weeks == 0 {
        return Err(Error::Config("churn_weeks must be positive".into()));
    }
    let obs_end = observation_start.plus_weeks(i64::from(observation_weeks));
    let gap_end = obs_end.plus_weeks(i64::from(gap_weeks));
    let churn_end = gap_end.plus_weeks(i64::from(churn_weeks));
    Ok(WindowLayout {
        observation: Interval { start: observation_start, end: obs_end },
        gap: Interval { start: obs_end, end: gap_end },
        churn_window: Interval { start: gap_end, end: churn_end },
        grid,
    })
}
