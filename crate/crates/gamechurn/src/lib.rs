//! File formats, parallel drivers and the `gamechurn` command line built on
//! [`gamechurn_core`].

#![forbid(unsafe_code)]

pub mod catalog;
pub mod cli;
pub mod error;
pub mod gaf_io;
pub mod labels;
pub mod logfile;
pub mod manifest;
pub mod matrix_io;
pub mod model_io;
pub mod parallel;
pub mod submission;

pub use error::{Error, Result};
