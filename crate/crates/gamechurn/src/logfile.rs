//! The canonical 11-column event log CSV.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};
use gamechurn_core::{Event, EventCatalog, LogId, Timestamp};

use crate::error::{Error, Result};

pub const LOG_HEADER: [&str; 11] = [
    "account_id",
    "char_id",
    "log_id",
    "timestamp",
    "actor_level",
    "target_level",
    "money_delta",
    "equip_score",
    "object_id",
    "object_count",
    "guild_id",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    /// Rows with unknown log ids are dropped and reported.
    #[default]
    Strict,
    /// Rows with unknown log ids are kept under the "unknown" group.
    Lenient,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// 1-based line in the file; the header is line 1.
    pub line: u64,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseReport {
    pub rows: u64,
    pub accepted: u64,
    pub diagnostics: Vec<Diagnostic>,
}

impl ParseReport {
    pub fn is_clean(&self) -> bool {
        self.diagnostics.is_empty()
    }

    /// First few diagnostics as one line, for error messages.
    pub fn summary(&self) -> String {
        let shown: Vec<String> =
            self.diagnostics.iter().take(5).map(|d| format!("line {}: {}", d.line, d.message)).collect();
        let more = self.diagnostics.len().saturating_sub(5);
        if more > 0 {
            format!("{} (and {more} more)", shown.join("; "))
        } else {
            shown.join("; ")
        }
    }
}

/// Parses `YYYY-MM-DDTHH:MM:SSZ`.
pub fn parse_timestamp(s: &str) -> Option<Timestamp> {
    if !s.ends_with('Z') {
        return None;
    }
    DateTime::parse_from_rfc3339(s).ok().map(|t| Timestamp::from_secs(t.timestamp()))
}

pub fn format_timestamp(t: Timestamp) -> String {
    DateTime::<Utc>::from_timestamp(t.secs(), 0)
        .map(|d| d.to_rfc3339_opts(SecondsFormat::Secs, true))
        .unwrap_or_else(|| t.secs().to_string())
}

fn optional<T: std::str::FromStr>(field: &str, name: &str) -> std::result::Result<Option<T>, String> {
    if field.is_empty() {
        return Ok(None);
    }
    field.parse().map(Some).map_err(|_| format!("invalid {name} {field:?}"))
}

fn optional_text(field: &str) -> Option<String> {
    (!field.is_empty()).then(|| field.to_string())
}

fn parse_row(rec: &csv::StringRecord) -> std::result::Result<Event, String> {
    if rec.len() != LOG_HEADER.len() {
        return Err(format!("expected {} fields, found {}", LOG_HEADER.len(), rec.len()));
    }
    let account_id = &rec[0];
    if account_id.is_empty() {
        return Err("empty account_id".into());
    }
    let log_id: u16 = rec[2].parse().map_err(|_| format!("invalid log_id {:?}", &rec[2]))?;
    let timestamp = parse_timestamp(&rec[3]).ok_or_else(|| format!("invalid timestamp {:?}", &rec[3]))?;
    let equip_score: Option<f64> = optional(&rec[7], "equip_score")?;
    if equip_score.is_some_and(|v| !(v.is_finite() && v >= 0.0)) {
        return Err(format!("equip_score must be finite and >= 0, got {:?}", &rec[7]));
    }
    Ok(Event {
        account_id: account_id.to_string(),
        char_id: rec[1].to_string(),
        log_id: LogId(log_id),
        timestamp,
        actor_level: optional(&rec[4], "actor_level")?,
        target_level: optional(&rec[5], "target_level")?,
        money_delta: optional(&rec[6], "money_delta")?,
        equip_score,
        object_id: optional_text(&rec[8]),
        object_count: optional(&rec[9], "object_count")?,
        guild_id: optional_text(&rec[10]),
    })
}

/// Reads events in file order. A missing or different header is fatal; bad
/// rows are skipped and reported. `period` bounds accepted timestamps.
pub fn read_log<R: Read>(
    reader: R,
    catalog: &EventCatalog,
    mode: ParseMode,
    period: Option<(Timestamp, Timestamp)>,
) -> Result<(Vec<Event>, ParseReport)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(reader);
    let mut records = rdr.records();
    let header = match records.next() {
        Some(h) => h?,
        None => return Err(Error::format("missing header row")),
    };
    if header.iter().ne(LOG_HEADER.iter().copied()) {
        return Err(Error::format(format!(
            "header mismatch: expected {:?}, found {:?}",
            LOG_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut events = Vec::new();
    let mut report = ParseReport::default();
    for rec in records {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        report.rows += 1;
        let event = match parse_row(&rec) {
            Ok(e) => e,
            Err(message) => {
                report.diagnostics.push(Diagnostic { line, message });
                continue;
            }
        };
        if let Some((start, end)) = period {
            if event.timestamp < start || event.timestamp >= end {
                report.diagnostics.push(Diagnostic { line, message: "timestamp outside the declared period".into() });
                continue;
            }
        }
        if !catalog.contains(event.log_id) {
            report.diagnostics.push(Diagnostic { line, message: format!("unknown log_id {}", event.log_id.0) });
            if mode == ParseMode::Strict {
                continue;
            }
        }
        report.accepted += 1;
        events.push(event);
    }
    Ok((events, report))
}

pub fn read_log_file(
    path: &Path,
    catalog: &EventCatalog,
    mode: ParseMode,
    period: Option<(Timestamp, Timestamp)>,
) -> Result<(Vec<Event>, ParseReport)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_log(BufReader::with_capacity(1 << 20, file), catalog, mode, period)
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(String::new, T::to_string)
}

pub fn write_log<W: Write>(writer: W, events: &[Event]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    w.write_record(LOG_HEADER)?;
    for e in events {
        w.write_record([
            e.account_id.as_str(),
            e.char_id.as_str(),
            &e.log_id.0.to_string(),
            &format_timestamp(e.timestamp),
            &opt(&e.actor_level),
            &opt(&e.target_level),
            &opt(&e.money_delta),
            &opt(&e.equip_score),
            e.object_id.as_deref().unwrap_or(""),
            &opt(&e.object_count),
            e.guild_id.as_deref().unwrap_or(""),
        ])?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

pub fn write_log_file(path: &Path, events: &[Event]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_log(BufWriter::with_capacity(1 << 20, file), events)
}
