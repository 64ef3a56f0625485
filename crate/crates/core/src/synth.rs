//! Deterministic synthetic game logs with daily and weekly cycles and a
//! planted, tunable pre-churn activity decline.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{LogNormal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::{Event, LogId};
use crate::labeling::{make_layout, WindowLayout};
use crate::seed::stream;
use crate::time::{is_weekend_offset, Timestamp, WeekGrid, DEFAULT_EPOCH, SECONDS_PER_DAY};

/// Length of the pre-quit decline.
pub const DECAY_DAYS: i64 = 14;
/// Days of history generated past the evaluation instant.
pub const TAIL_DAYS: i64 = 7;

const ENTER_WORLD: u16 = 0;
const LEAVE_WORLD: u16 = 11;
const LEVEL_UP: u16 = 14;
const CREATE_CHARACTER: u16 = 19;

/// Named signal strengths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalPreset {
    None,
    Weak,
    Strong,
}

impl SignalPreset {
    pub fn strength(self) -> f64 {
        match self {
            SignalPreset::None => 0.0,
            SignalPreset::Weak => 0.5,
            SignalPreset::Strong => 1.0,
        }
    }
}

impl FromStr for SignalPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(SignalPreset::None),
            "weak" => Ok(SignalPreset::Weak),
            "strong" => Ok(SignalPreset::Strong),
            _ => Err(Error::Config(format!("unknown signal preset {s:?} (none, weak, strong)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub seed: u64,
    pub n_players: usize,
    pub churn_rate: f64,
    pub observation_weeks: u32,
    pub gap_weeks: u32,
    pub churn_window_weeks: u32,
    pub signal_strength: f64,
    pub weekend_boost: f64,
    pub events_per_active_day_mean: f64,
    /// Observation start; a Wednesday midnight.
    pub start: Timestamp,
    pub account_prefix: String,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            n_players: 4000,
            churn_rate: 0.30,
            observation_weeks: 6,
            gap_weeks: 3,
            churn_window_weeks: 5,
            signal_strength: SignalPreset::Strong.strength(),
            weekend_boost: 1.5,
            events_per_active_day_mean: 6.0,
            start: DEFAULT_EPOCH,
            account_prefix: String::from("p"),
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.churn_rate) {
            return Err(Error::Config(format!("churn-rate must be in [0, 1], got {}", self.churn_rate)));
        }
        if self.observation_weeks == 0 {
            return Err(Error::Config("obs-weeks must be positive".into()));
        }
        if self.churn_window_weeks == 0 {
            return Err(Error::Config("churn-weeks must be positive".into()));
        }
        if !(self.signal_strength >= 0.0 && self.signal_strength <= 1.0) {
            return Err(Error::Config(format!("signal-strength must be in [0, 1], got {}", self.signal_strength)));
        }
        if !(self.weekend_boost >= 1.0 && self.weekend_boost.is_finite()) {
            return Err(Error::Config(format!("weekend-boost must be >= 1, got {}", self.weekend_boost)));
        }
        if !(self.events_per_active_day_mean > 0.0 && self.events_per_active_day_mean.is_finite()) {
            return Err(Error::Config(format!(
                "events-per-day must be positive, got {}",
                self.events_per_active_day_mean
            )));
        }
        if !self.start.is_wednesday_midnight() {
            return Err(Error::Alignment(format!("start {} is not a Wednesday midnight", self.start)));
        }
        Ok(())
    }

    fn total_days(&self) -> i64 {
        7 * i64::from(self.observation_weeks + self.gap_weeks + self.churn_window_weeks) + TAIL_DAYS
    }

    /// Window layout of the generated period, on a grid anchored at `start`.
    pub fn layout(&self) -> Result<WindowLayout> {
        self.validate()?;
        let grid = WeekGrid::new(self.start, self.start, self.start.plus_days(self.total_days()))?;
        make_layout(grid, self.start, self.observation_weeks, self.gap_weeks, self.churn_window_weeks)
    }

    pub fn account_id(&self, index: usize) -> String {
        format!("{}{index:06}", self.account_prefix)
    }
}

/// Generator-side answer key for one account.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub account_id: String,
    pub churned: bool,
    /// Day index of the account's last generated event.
    pub last_activity_day: i64,
    pub survival_days: u32,
    pub censored: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlayerOutput {
    pub events: Vec<Event>,
    pub truth: TruthRecord,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub layout: WindowLayout,
    /// Full history, ordered by account then timestamp.
    pub events: Vec<Event>,
    pub truth: Vec<TruthRecord>,
}

impl Dataset {
    /// Events inside the observation window, the part released to modelers.
    pub fn observation_events(&self) -> Vec<Event> {
        let obs = self.layout.observation;
        self.events.iter().filter(|e| obs.contains(e.timestamp)).cloned().collect()
    }
}

/// Exactly `round(churn_rate * n)` churners, placed by a seeded shuffle.
pub fn churner_flags(cfg: &GenConfig) -> Vec<bool> {
    let n = cfg.n_players;
    let churners = libm::round(cfg.churn_rate * n as f64) as usize;
    let mut flags: Vec<bool> = (0..n).map(|i| i < churners).collect();
    flags.shuffle(&mut stream(cfg.seed, "churners", 0));
    flags
}

// Relative session-start likelihood per hour of day, peaking in the evening.
const HOUR_WEIGHTS: [f64; 24] = [
    3.0, 2.0, 1.2, 0.7, 0.4, 0.3, 0.3, 0.5, 0.8, 1.0, 1.2, 1.4, 1.8, 1.8, 1.6, 1.6, 1.8, 2.2, 2.8, 3.5, 4.2, 4.6, 4.4,
    3.8,
];

struct Character {
    id: String,
    level: u32,
}

struct PlayerState {
    account: String,
    chars: Vec<Character>,
    equip: f64,
    guild: Option<String>,
    created: bool,
}

struct Sampler {
    kinds: Vec<u16>,
    kind_index: WeightedIndex<f64>,
    hours: WeightedIndex<f64>,
}

impl Sampler {
    fn new() -> Self {
        let kinds: Vec<u16> = (0..20).filter(|k| ![ENTER_WORLD, LEAVE_WORLD, CREATE_CHARACTER].contains(k)).collect();
        // Geometric frequency by catalog position.
        let weights: Vec<f64> = kinds.iter().map(|&k| libm::pow(0.8, f64::from(k))).collect();
        Sampler {
            kinds,
            kind_index: WeightedIndex::new(weights).expect("positive weights"),
            hours: WeightedIndex::new(HOUR_WEIGHTS).expect("positive weights"),
        }
    }
}

impl PlayerState {
    fn event(&mut self, rng: &mut ChaCha8Rng, kind: u16, ts: Timestamp) -> Event {
        let c = rng.random_range(0..self.chars.len());
        let mut e = Event::bare(self.account.clone(), LogId(kind), ts);
        e.char_id = self.chars[c].id.clone();
        let level = self.chars[c].level;
        e.actor_level = Some(level);
        match kind {
            1 | 10 | 15 => {
                let lo = level.saturating_sub(3).max(1);
                e.target_level = Some(rng.random_range(lo..=level + 3));
            }
            4 => e.money_delta = Some(i64::from(rng.random_range(10..500u32) * level)),
            9 | 16 => e.money_delta = Some(-i64::from(rng.random_range(10..400u32) * level)),
            2 | 6 | 13 => {
                e.object_id = Some(format!("item{}", rng.random_range(0..400u32)));
                e.object_count = Some(rng.random_range(1..=5));
                if kind == 13 {
                    self.equip += rng.random_range(0.5..4.0);
                    e.equip_score = Some(libm::round(self.equip * 100.0) / 100.0);
                }
            }
            LEVEL_UP => {
                if self.chars[c].level < 60 {
                    self.chars[c].level += 1;
                }
                e.actor_level = Some(self.chars[c].level);
            }
            17 | 18 => {
                let g = self.guild.get_or_insert_with(|| format!("g{}", rng.random_range(0..200u32))).clone();
                e.guild_id = Some(g);
            }
            ENTER_WORLD => e.equip_score = Some(libm::round(self.equip * 100.0) / 100.0),
            _ => {}
        }
        if e.guild_id.is_none() && kind == 8 {
            e.guild_id = self.guild.clone();
        }
        e
    }

    /// One day's events split over a few sessions.
    fn day_events(&mut self, rng: &mut ChaCha8Rng, sampler: &Sampler, day_start: Timestamp, count: u64) -> Vec<Event> {
        let mut out = Vec::with_capacity(count as usize + 2);
        if count == 0 {
            return out;
        }
        let sessions = (1 + count / 15).min(6);
        for s in 0..sessions {
            let n = count / sessions + u64::from(s < count % sessions);
            if n == 0 {
                continue;
            }
            let hour = sampler.hours.sample(rng) as i64;
            let mut t = hour * 3600 + rng.random_range(0..3600);
            let last = SECONDS_PER_DAY - 1;
            for k in 0..n {
                let kind = if k == 0 {
                    if self.created {
                        ENTER_WORLD
                    } else {
                        self.created = true;
                        CREATE_CHARACTER
                    }
                } else if k + 1 == n && n > 2 {
                    LEAVE_WORLD
                } else {
                    sampler.kinds[sampler.kind_index.sample(rng)]
                };
                out.push(self.event(rng, kind, day_start + t.min(last)));
                t += rng.random_range(10..170);
            }
        }
        out.sort_by_key(|e| e.timestamp);
        out
    }
}

/// Intensity multiplier over the decline before `quit`.
fn decay(day: i64, quit: Option<i64>, strength: f64) -> f64 {
    match quit {
        Some(q) if day >= q - DECAY_DAYS => 1.0 - strength * (day - (q - DECAY_DAYS) + 1) as f64 / DECAY_DAYS as f64,
        _ => 1.0,
    }
}

/// Generates one account's full history from its own seeded stream.
pub fn generate_player(cfg: &GenConfig, layout: &WindowLayout, index: usize, churner: bool) -> PlayerOutput {
    let mut rng = stream(cfg.seed, "player", index as u64);
    let sampler = Sampler::new();
    let grid = &layout.grid;
    let obs_end = grid.day_index(layout.observation.end);
    let churn_start = grid.day_index(layout.churn_window.start);
    let eval_day = grid.day_index(layout.churn_window.end);
    let total = cfg.total_days();

    // Churners quit at most a week past the observation end, so part of
    // their decline is always observable.
    let quit = if churner {
        Some(rng.random_range((obs_end - DECAY_DAYS).max(1)..=(obs_end + 7).min(churn_start)))
    } else if rng.random_bool(0.25) {
        Some(rng.random_range(churn_start + 1..=eval_day))
    } else {
        None
    };
    let end = quit.unwrap_or(total);
    let base = cfg.events_per_active_day_mean;
    let engagement = LogNormal::new(-0.125, 0.5).expect("valid lognormal").sample(&mut rng) * base;
    let p_active = rng.random_range(0.35..0.95);
    let weeks = (total + 6) / 7;
    let wobble: Vec<f64> = (0..weeks).map(|_| rng.random_range(0.75..1.25)).collect();

    let account = cfg.account_id(index);
    let n_chars = rng.random_range(1..=3usize);
    let mut state = PlayerState {
        chars: (0..n_chars)
            .map(|c| Character { id: format!("{account}_c{c}"), level: rng.random_range(1..=45) })
            .collect(),
        account,
        equip: rng.random_range(10.0..200.0),
        guild: rng.random_bool(0.4).then(|| format!("g{}", rng.random_range(0..200u32))),
        created: false,
    };

    let mut days: Vec<(i64, u64)> = Vec::new();
    for d in 0..end {
        let active = rng.random_bool(p_active);
        let weekend = if is_weekend_offset(WeekGrid::weekday_offset(d)) { cfg.weekend_boost } else { 1.0 };
        let lambda = engagement * weekend * decay(d, quit, cfg.signal_strength) * wobble[(d / 7) as usize];
        let count =
            if active && lambda > 0.0 { Poisson::new(lambda).map_or(0, |p| p.sample(&mut rng) as u64) } else { 0 };
        if count > 0 {
            days.push((d, count));
        }
    }
    // Guarantees that pin the account to its planned outcome.
    let require = |lo: i64, hi: i64, days: &mut Vec<(i64, u64)>, rng: &mut ChaCha8Rng| {
        if lo < hi && !days.iter().any(|&(d, _)| d >= lo && d < hi) {
            days.push((rng.random_range(lo..hi), 1));
            days.sort();
        }
    };
    require(0, obs_end.min(end), &mut days, &mut rng);
    if !churner {
        require(churn_start, eval_day.min(end), &mut days, &mut rng);
        if quit.is_none() {
            require(eval_day, total, &mut days, &mut rng);
        }
    }

    let mut events = Vec::new();
    for (d, count) in days {
        events.extend(state.day_events(&mut rng, &sampler, grid.day_start(d), count));
    }
    let truth = truth_of(&state.account, &events, layout);
    PlayerOutput { events, truth }
}

fn truth_of(account: &str, events: &[Event], layout: &WindowLayout) -> TruthRecord {
    let grid = &layout.grid;
    let evaluation = layout.churn_window.end;
    let last_observed = events.iter().rev().find(|e| layout.observation.contains(e.timestamp)).map(|e| e.timestamp);
    let last_known = events.iter().rev().find(|e| e.timestamp <= evaluation).map(|e| e.timestamp);
    let survival_days = match (last_observed, last_known) {
        (Some(o), Some(k)) => (grid.day_index(k) - grid.day_index(o)).max(0) as u32,
        _ => 0,
    };
    TruthRecord {
        account_id: String::from(account),
        churned: !events.iter().any(|e| layout.churn_window.contains(e.timestamp)),
        last_activity_day: events.last().map_or(0, |e| grid.day_index(e.timestamp)),
        survival_days,
        censored: events.iter().any(|e| e.timestamp >= evaluation),
    }
}

/// Concatenates per-player outputs in account order.
pub fn assemble(layout: WindowLayout, players: Vec<PlayerOutput>) -> Dataset {
    let mut events = Vec::with_capacity(players.iter().map(|p| p.events.len()).sum());
    let mut truth = Vec::with_capacity(players.len());
    for p in players {
        events.extend(p.events);
        truth.push(p.truth);
    }
    Dataset { layout, events, truth }
}

pub fn generate(cfg: &GenConfig) -> Result<Dataset> {
    let layout = cfg.layout()?;
    let flags = churner_flags(cfg);
    let players = flags.iter().enumerate().map(|(i, &c)| generate_player(cfg, &layout, i, c)).collect();
    Ok(assemble(layout, players))
}

impl fmt::Display for TruthRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.account_id, u8::from(self.churned), self.survival_days, u8::from(self.censored))
    }
}
