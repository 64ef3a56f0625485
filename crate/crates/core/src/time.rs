//! UTC instants and the Wednesday-aligned week/day grid.

use core::fmt;
use core::ops::{Add, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SECONDS_PER_MINUTE: i64 = 60;
pub const SECONDS_PER_DAY: i64 = 86_400;
pub const SECONDS_PER_WEEK: i64 = 7 * SECONDS_PER_DAY;

/// Seconds since 1970-01-01T00:00:00Z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Timestamp(pub i64);

impl Timestamp {
    pub const fn from_secs(secs: i64) -> Self {
        Timestamp(secs)
    }

    pub const fn secs(self) -> i64 {
        self.0
    }

    pub const fn plus_days(self, days: i64) -> Self {
        Timestamp(self.0 + days * SECONDS_PER_DAY)
    }

    pub const fn plus_weeks(self, weeks: i64) -> Self {
        Timestamp(self.0 + weeks * SECONDS_PER_WEEK)
    }

    /// Days since the Unix epoch, floored.
    pub const fn unix_day(self) -> i64 {
        self.0.div_euclid(SECONDS_PER_DAY)
    }

    pub const fn is_midnight(self) -> bool {
        self.0.rem_euclid(SECONDS_PER_DAY) == 0
    }

    /// Monday = 0 ... Sunday = 6.
    pub const fn weekday_from_monday(self) -> u8 {
        // 1970-01-01 was a Thursday.
        (self.unix_day() + 3).rem_euclid(7) as u8
    }

    pub const fn is_wednesday_midnight(self) -> bool {
        self.is_midnight() && self.weekday_from_monday() == 2
    }
}

impl Add<i64> for Timestamp {
    type Output = Timestamp;
    fn add(self, secs: i64) -> Timestamp {
        Timestamp(self.0 + secs)
    }
}

impl Sub for Timestamp {
    type Output = i64;
    fn sub(self, other: Timestamp) -> i64 {
        self.0 - other.0
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}s", self.0)
    }
}

/// 2016-04-06T00:00:00Z, a Wednesday. Default grid epoch.
pub const DEFAULT_EPOCH: Timestamp = Timestamp(1_459_900_800);

/// Week and day numbering anchored at a Wednesday 00:00 UTC epoch.
///
/// Weeks run from one Wednesday midnight to the next. Instants on a boundary
/// belong to the week (or day) that starts there.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeekGrid {
    epoch: Timestamp,
    period_start: Timestamp,
    period_end: Timestamp,
}

impl WeekGrid {
    pub fn new(epoch: Timestamp, period_start: Timestamp, period_end: Timestamp) -> Result<Self> {
        if !epoch.is_wednesday_midnight() {
            return Err(Error::Alignment(alloc::format!("grid epoch {epoch} is not a Wednesday 00:00 UTC")));
        }
        if period_start >= period_end {
            return Err(Error::Window(alloc::format!(
                "grid period start {period_start} is not before end {period_end}"
            )));
        }
        Ok(WeekGrid { epoch, period_start, period_end })
    }

    /// Grid whose epoch is also its period start, spanning `weeks` weeks.
    pub fn starting_at(epoch: Timestamp, weeks: u32) -> Result<Self> {
        WeekGrid::new(epoch, epoch, epoch.plus_weeks(i64::from(weeks.max(1))))
    }

    pub fn epoch(&self) -> Timestamp {
        self.epoch
    }

    pub fn period_start(&self) -> Timestamp {
        self.period_start
    }

    pub fn period_end(&self) -> Timestamp {
        self.period_end
    }

    pub fn contains(&self, t: Timestamp) -> bool {
        self.period_start <= t && t < self.period_end
    }

    pub fn week_index(&self, t: Timestamp) -> i64 {
        (t - self.epoch).div_euclid(SECONDS_PER_WEEK)
    }

    pub fn day_index(&self, t: Timestamp) -> i64 {
        (t - self.epoch).div_euclid(SECONDS_PER_DAY)
    }

    pub fn day_start(&self, day: i64) -> Timestamp {
        self.epoch.plus_days(day)
    }

    pub fn week_start(&self, week: i64) -> Timestamp {
        self.epoch.plus_weeks(week)
    }

    pub fn is_week_boundary(&self, t: Timestamp) -> bool {
        (t - self.epoch).rem_euclid(SECONDS_PER_WEEK) == 0
    }

    /// Offset of a day within its grid week: 0 = Wednesday ... 6 = Tuesday.
    pub fn weekday_offset(day: i64) -> usize {
        day.rem_euclid(7) as usize
    }
}

/// Short names for [`WeekGrid::weekday_offset`] values.
pub const WEEKDAY_NAMES: [&str; 7] = ["wed", "thu", "fri", "sat", "sun", "mon", "tue"];

/// True for the Saturday and Sunday offsets of a Wednesday-aligned week.
pub fn is_weekend_offset(offset: usize) -> bool {
    offset == 3 || offset == 4
}
