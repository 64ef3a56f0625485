//! Competition submission files.

use std::io::{Read, Write};
use std::path::Path;

use gamechurn_core::scoring::Submission;

use crate::error::{Error, Result};
use crate::labels::{create, finish, open, parse_flag, rows, writer};

pub const CHURN_SUBMISSION_HEADER: [&str; 2] = ["account_id", "churn_yn"];
pub const SURVIVAL_SUBMISSION_HEADER: [&str; 2] = ["account_id", "survival"];

/// Parses a track 1 (`account_id,churn_yn`) or track 2 (`account_id,survival`)
/// submission. Duplicates are left for scoring to reject.
pub fn read_submission<R: Read>(r: R, track: u8) -> Result<Submission> {
    match track {
        1 => rows(r, &CHURN_SUBMISSION_HEADER)?
            .into_iter()
            .map(|(line, rec)| Ok((rec[0].to_string(), parse_flag(&rec[1], line)?)))
            .collect::<Result<_>>()
            .map(Submission::Churn),
        2 => rows(r, &SURVIVAL_SUBMISSION_HEADER)?
            .into_iter()
            .map(|(line, rec)| Ok((rec[0].to_string(), parse_survival(&rec[1], line)?)))
            .collect::<Result<_>>()
            .map(Submission::Survival),
        _ => Err(Error::config(format!("track must be 1 or 2, got {track}"))),
    }
}

fn parse_survival(field: &str, line: u64) -> Result<f64> {
    if field.contains('+') {
        return Err(Error::format(format!("line {line}: '+' is not allowed in submissions ({field:?})")));
    }
    let v: f64 = field.parse().map_err(|_| Error::format(format!("line {line}: invalid survival {field:?}")))?;
    if !(v.is_finite() && v >= 0.0) {
        return Err(Error::format(format!("line {line}: survival must be a non-negative number, got {field:?}")));
    }
    Ok(v)
}

pub fn read_submission_file(path: &Path, track: u8) -> Result<Submission> {
    read_submission(open(path)?, track)
}

pub fn write_submission<W: Write>(w: W, submission: &Submission) -> Result<()> {
    let mut w = writer(w);
    match submission {
        Submission::Churn(rows) => {
            w.write_record(CHURN_SUBMISSION_HEADER)?;
            for (a, c) in rows {
                w.write_record([a.as_str(), if *c { "1" } else { "0" }])?;
            }
        }
        Submission::Survival(rows) => {
            w.write_record(SURVIVAL_SUBMISSION_HEADER)?;
            for (a, v) in rows {
                w.write_record([a.as_str(), &format!("{v:.4}")])?;
            }
        }
    }
    finish(w)
}

pub fn write_submission_file(path: &Path, submission: &Submission) -> Result<()> {
    write_submission(std::io::BufWriter::new(create(path)?), submission)
}
