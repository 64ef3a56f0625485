//! Label, survival, ground-truth and loyalty-feature CSV files.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use gamechurn_core::labeling::{LoyaltyFeatures, SurvivalLabel};
use gamechurn_core::scoring::Labels;
use gamechurn_core::synth::TruthRecord;

use crate::error::{Error, Result};

pub const CHURN_HEADER: [&str; 2] = ["account_id", "churned"];
pub const SURVIVAL_HEADER: [&str; 2] = ["account_id", "survival"];
pub const TRUTH_HEADER: [&str; 4] = ["account_id", "churned", "survival_days", "censored"];
pub const LOYALTY_HEADER: [&str; 5] = ["account_id", "month", "payment", "playtime", "usage_rate"];

pub(crate) fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

pub(crate) fn finish<W: Write>(mut w: csv::Writer<W>) -> Result<()> {
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

pub(crate) fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::io(path, e))
}

/// Rows after checking the header, paired with 1-based line numbers.
pub(crate) fn rows<R: Read>(reader: R, header: &[&str]) -> Result<Vec<(u64, csv::StringRecord)>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let found = rdr.headers()?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::format(format!(
            "header mismatch: expected {}, found {}",
            header.join(","),
            found.iter().collect::<Vec<_>>().join(",")
        )));
    }
    rdr.records()
        .map(|r| {
            let r = r?;
            Ok((r.position().map_or(0, |p| p.line()), r))
        })
        .collect()
}

pub(crate) fn parse_flag(field: &str, line: u64) -> Result<bool> {
    match field {
        "1" => Ok(true),
        "0" => Ok(false),
        _ => Err(Error::format(format!("line {line}: expected 1 or 0, found {field:?}"))),
    }
}

fn insert_unique<T>(map: &mut BTreeMap<String, T>, account: &str, value: T, line: u64) -> Result<()> {
    if map.insert(account.to_string(), value).is_some() {
        return Err(Error::format(format!("line {line}: duplicate account {account}")));
    }
    Ok(())
}

pub fn write_churn_labels<W: Write>(w: W, labels: &BTreeMap<String, bool>) -> Result<()> {
    let mut w = writer(w);
    w.write_record(CHURN_HEADER)?;
    for (account, churned) in labels {
        w.write_record([account.as_str(), if *churned { "1" } else { "0" }])?;
    }
    finish(w)
}

pub fn write_survival_labels<W: Write>(w: W, labels: &BTreeMap<String, SurvivalLabel>) -> Result<()> {
    let mut w = writer(w);
    w.write_record(SURVIVAL_HEADER)?;
    for (account, label) in labels {
        w.write_record([account.as_str(), &label.to_string()])?;
    }
    finish(w)
}

pub fn read_churn_labels<R: Read>(r: R) -> Result<BTreeMap<String, bool>> {
    let mut map = BTreeMap::new();
    for (line, rec) in rows(r, &CHURN_HEADER)? {
        insert_unique(&mut map, &rec[0], parse_flag(&rec[1], line)?, line)?;
    }
    Ok(map)
}

pub fn read_survival_labels<R: Read>(r: R) -> Result<BTreeMap<String, SurvivalLabel>> {
    let mut map = BTreeMap::new();
    for (line, rec) in rows(r, &SURVIVAL_HEADER)? {
        let label: SurvivalLabel =
            rec[1].parse().map_err(|e: gamechurn_core::Error| Error::format(format!("line {line}: {e}")))?;
        insert_unique(&mut map, &rec[0], label, line)?;
    }
    Ok(map)
}

/// Reads either label file, chosen by its header.
pub fn read_labels_file(path: &Path) -> Result<Labels> {
    let mut text = String::new();
    open(path)?.read_to_string(&mut text).map_err(|e| Error::io(path, e))?;
    let header = text.lines().next().unwrap_or("");
    if header == SURVIVAL_HEADER.join(",") {
        Ok(Labels::Survival(read_survival_labels(text.as_bytes())?))
    } else {
        Ok(Labels::Churn(read_churn_labels(text.as_bytes())?))
    }
}

pub fn write_truth<W: Write>(w: W, truth: &[TruthRecord]) -> Result<()> {
    let mut w = writer(w);
    w.write_record(TRUTH_HEADER)?;
    for t in truth {
        w.write_record([
            t.account_id.as_str(),
            if t.churned { "1" } else { "0" },
            &t.survival_days.to_string(),
            if t.censored { "1" } else { "0" },
        ])?;
    }
    finish(w)
}

pub fn read_truth<R: Read>(r: R) -> Result<Vec<TruthRecord>> {
    rows(r, &TRUTH_HEADER)?
        .into_iter()
        .map(|(line, rec)| {
            Ok(TruthRecord {
                account_id: rec[0].to_string(),
                churned: parse_flag(&rec[1], line)?,
                last_activity_day: 0,
                survival_days: rec[2]
                    .parse()
                    .map_err(|_| Error::format(format!("line {line}: invalid survival_days {:?}", &rec[2])))?,
                censored: parse_flag(&rec[3], line)?,
            })
        })
        .collect()
}

/// Monthly loyalty inputs keyed by month, each a list of per-account triples.
pub fn read_loyalty<R: Read>(r: R) -> Result<BTreeMap<u32, Vec<(String, LoyaltyFeatures)>>> {
    let mut months: BTreeMap<u32, Vec<(String, LoyaltyFeatures)>> = BTreeMap::new();
    for (line, rec) in rows(r, &LOYALTY_HEADER)? {
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .parse()
                .map_err(|_| Error::format(format!("line {line}: invalid {} {:?}", LOYALTY_HEADER[i], &rec[i])))
        };
        let month: u32 =
            rec[1].parse().map_err(|_| Error::format(format!("line {line}: invalid month {:?}", &rec[1])))?;
        let features = LoyaltyFeatures { payment: num(2)?, playtime: num(3)?, usage_rate: num(4)? };
        months.entry(month).or_default().push((rec[0].to_string(), features));
    }
    Ok(months)
}
