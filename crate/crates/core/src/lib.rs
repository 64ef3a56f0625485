//! Churn prediction and survival analysis primitives for game event logs.
//!
//! This crate is `no_std` (it needs `alloc`) and holds every algorithm of the
//! toolkit: the Wednesday-aligned week grid, sessionization, the synthetic log
//! generator, churn and right-censored survival labeling, loyalty grading,
//! feature extraction, Gramian Angular Field encoding, the linear and
//! extremely-randomized-tree baselines, and the competition scoring rules.
//!
//! Reading and writing files, parallel drivers and the command line live in
//! the companion `gamechurn` crate.

#![no_std]
#![forbid(unsafe_code)]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod error;
pub mod event;
pub mod features;
pub mod gaf;
pub mod labeling;
pub mod linalg;
pub mod models;
pub mod scoring;
pub mod seed;
pub mod synth;
pub mod time;
pub mod timeline;

pub use error::{Error, Result};
pub use event::{Event, EventCatalog, LogId};
pub use time::{Timestamp, WeekGrid, SECONDS_PER_DAY, SECONDS_PER_WEEK};
pub use timeline::{PlayerTimeline, Session};
