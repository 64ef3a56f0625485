//! Per-player event timelines and inactivity-gap sessionization.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::event::Event;
use crate::time::{Timestamp, WeekGrid, SECONDS_PER_MINUTE};

/// Default inactivity gap separating two sessions.
pub const DEFAULT_SESSION_GAP_MINUTES: u32 = 15;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub account_id: String,
    pub start: Timestamp,
    pub end: Timestamp,
    pub event_count: usize,
}

impl Session {
    pub fn duration_secs(&self) -> i64 {
        self.end - self.start
    }
}

/// Splits time-sorted events into sessions. A new session starts whenever
/// the distance to the previous event is strictly greater than the gap.
pub fn sessionize_events(events: &[Event], gap_minutes: u32) -> Vec<Session> {
    let gap = i64::from(gap_minutes) * SECONDS_PER_MINUTE;
    let mut sessions: Vec<Session> = Vec::new();
    for event in events {
        match sessions.last_mut() {
            Some(current) if event.timestamp - current.end <= gap => {
                current.end = event.timestamp;
                current.event_count += 1;
            }
            _ => sessions.push(Session {
                account_id: event.account_id.clone(),
                start: event.timestamp,
                end: event.timestamp,
                event_count: 1,
            }),
        }
    }
    sessions
}

/// One player's events in time order, with derived sessions and active days.
#[derive(Debug, Clone, PartialEq)]
pub struct PlayerTimeline {
    account_id: String,
    events: Vec<Event>,
    sessions: Vec<Session>,
    active_days: BTreeSet<i64>,
    grid: WeekGrid,
    gap_minutes: u32,
}

impl PlayerTimeline {
    /// Sorts `events` by timestamp (stable, so ties keep input order) and
    /// derives sessions and active days.
    pub fn new(account_id: impl Into<String>, mut events: Vec<Event>, grid: WeekGrid, gap_minutes: u32) -> Self {
        events.sort_by_key(|e| e.timestamp);
        let sessions = sessionize_events(&events, gap_minutes);
        let active_days = events.iter().map(|e| grid.day_index(e.timestamp)).collect();
        PlayerTimeline { account_id: account_id.into(), events, sessions, active_days, grid, gap_minutes }
    }

    pub fn account_id(&self) -> &str {
        &self.account_id
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn sessions(&self) -> &[Session] {
        &self.sessions
    }

    pub fn active_days(&self) -> &BTreeSet<i64> {
        &self.active_days
    }

    pub fn grid(&self) -> &WeekGrid {
        &self.grid
    }

    pub fn gap_minutes(&self) -> u32 {
        self.gap_minutes
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn first_timestamp(&self) -> Option<Timestamp> {
        self.events.first().map(|e| e.timestamp)
    }

    pub fn last_timestamp(&self) -> Option<Timestamp> {
        self.events.last().map(|e| e.timestamp)
    }

    /// Events with `start <= timestamp < end`, in order.
    pub fn events_in(&self, start: Timestamp, end: Timestamp) -> &[Event] {
        let lo = self.events.partition_point(|e| e.timestamp < start);
        let hi = self.events.partition_point(|e| e.timestamp < end);
        &self.events[lo..hi.max(lo)]
    }

    /// A new timeline holding only the events in `[start, end)`.
    pub fn restricted(&self, start: Timestamp, end: Timestamp) -> PlayerTimeline {
        PlayerTimeline::new(self.account_id.clone(), self.events_in(start, end).to_vec(), self.grid, self.gap_minutes)
    }

    pub fn sessionize(&self, gap_minutes: u32) -> Vec<Session> {
        sessionize_events(&self.events, gap_minutes)
    }
}

/// Groups events by account, preserving input order within each account.
pub fn group_by_account(events: Vec<Event>) -> BTreeMap<String, Vec<Event>> {
    let mut groups: BTreeMap<String, Vec<Event>> = BTreeMap::new();
    for event in events {
        match groups.get_mut(event.account_id.as_str()) {
            Some(list) => list.push(event),
            None => {
                groups.insert(event.account_id.clone(), alloc::vec![event]);
            }
        }
    }
    groups
}

/// Builds one timeline per account, ordered by account id.
pub fn build_timelines(events: Vec<Event>, grid: WeekGrid, gap_minutes: u32) -> Vec<PlayerTimeline> {
    group_by_account(events)
        .into_iter()
        .map(|(account, evs)| PlayerTimeline::new(account, evs, grid, gap_minutes))
        .collect()
}
