use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use super::daily::daily_series;
use super::overall::{overall_features, OVERALL_PREFIX, STAT_PREFIX};
use super::quantile::QuantileMap;
use super::spectrum::dominant_frequency;
use super::weekly::weekly_features;
use super::weighting::time_weighted;
use crate::error::{Error, Result};
use crate::event::EventCatalog;
use crate::labeling::WindowLayout;
use crate::timeline::PlayerTimeline;

/// Feature families that can be toggled independently.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    DailyStats,
    Overall,
    Weekly,
    TimeWeighted,
    Frequency,
}

impl Family {
    pub const ALL: [Family; 5] =
        [Family::DailyStats, Family::Overall, Family::Weekly, Family::TimeWeighted, Family::Frequency];

    pub fn name(self) -> &'static str {
        match self {
            Family::DailyStats => "daily-stats",
            Family::Overall => "overall",
            Family::Weekly => "weekly",
            Family::TimeWeighted => "time-weighted",
            Family::Frequency => "frequency",
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown feature family {s:?}")))
    }
}

/// Parses a comma-separated family list.
pub fn parse_families(list: &str) -> Result<BTreeSet<Family>> {
    list.split(',').map(str::trim).filter(|s| !s.is_empty()).map(Family::from_str).collect()
}

/// Named numeric columns per account. Columns are kept in lexicographic
/// order and every value is finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    accounts: Vec<String>,
    columns: Vec<String>,
    /// Row-major values.
    rows: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    /// Assembles a matrix from per-account named features. Every account must
    /// provide the same feature names.
    pub fn from_named_rows(rows: Vec<(String, Vec<(String, f64)>)>) -> Result<Self> {
        let mut accounts = Vec::with_capacity(rows.len());
        let mut columns: Option<Vec<String>> = None;
        let mut values = Vec::with_capacity(rows.len());
        for (account, mut features) in rows {
            features.sort_by(|a, b| a.0.cmp(&b.0));
            let names: Vec<String> = features.iter().map(|(n, _)| n.clone()).collect();
            if names.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Schema(format!("duplicate feature name for account {account}")));
            }
            match &columns {
                None => columns = Some(names),
                Some(c) if *c == names => {}
                Some(_) => return Err(Error::Schema(format!("account {account} has a different feature set"))),
            }
            accounts.push(account);
            values.push(features.into_iter().map(|(_, v)| v).collect());
        }
        FeatureMatrix::new(accounts, columns.unwrap_or_default(), values)
    }

    pub fn new(accounts: Vec<String>, columns: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if accounts.len() != rows.len() {
            return Err(Error::Schema("account count differs from row count".into()));
        }
        if rows.iter().any(|r| r.len() != columns.len()) {
            return Err(Error::Schema("matrix is not rectangular".into()));
        }
        if columns.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Schema("column names must be unique and sorted".into()));
        }
        for (account, row) in accounts.iter().zip(&rows) {
            if let Some(c) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::Validation(format!("non-finite value in {account}/{}", columns[c])));
            }
        }
        Ok(FeatureMatrix { accounts, columns, rows })
    }

    pub fn accounts(&self) -> &[String] {
        &self.accounts
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.binary_search_by(|c| c.as_str().cmp(name)).ok()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let c = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[c]).collect())
    }

    /// Keeps the listed accounts in the given order.
    pub fn select_accounts(&self, wanted: &[String]) -> Result<FeatureMatrix> {
        let index: BTreeMap<&str, usize> = self.accounts.iter().enumerate().map(|(i, a)| (a.as_str(), i)).collect();
        let mut rows = Vec::with_capacity(wanted.len());
        for a in wanted {
            let i = index.get(a.as_str()).ok_or_else(|| Error::Coverage(format!("no feature row for {a}")))?;
            rows.push(self.rows[*i].clone());
        }
        FeatureMatrix::new(wanted.to_vec(), self.columns.clone(), rows)
    }
}

/// Per-column quantile maps fit on a training matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileTransform {
    pub columns: Vec<String>,
    pub maps: Vec<QuantileMap>,
}

impl QuantileTransform {
    pub fn fit(train: &FeatureMatrix) -> Result<Self> {
        let maps = train
            .columns()
            .iter()
            .map(|c| QuantileMap::fit(&train.column(c).expect("own column")))
            .collect::<Result<Vec<_>>>()?;
        Ok(QuantileTransform { columns: train.columns().to_vec(), maps })
    }

    pub fn apply(&self, m: &FeatureMatrix) -> Result<FeatureMatrix> {
        if m.columns() != self.columns.as_slice() {
            return Err(Error::Schema(schema_diff(&self.columns, m.columns())));
        }
        let rows = m.rows().iter().map(|r| r.iter().zip(&self.maps).map(|(x, q)| q.apply(*x)).collect()).collect();
        FeatureMatrix::new(m.accounts().to_vec(), m.columns().to_vec(), rows)
    }
}

/// Describes how two column lists differ, naming the offending columns.
pub fn schema_diff(expected: &[String], got: &[String]) -> String {
    let e: BTreeSet<&String> = expected.iter().collect();
    let g: BTreeSet<&String> = got.iter().collect();
    let missing: Vec<&str> = e.difference(&g).map(|s| s.as_str()).collect();
    let extra: Vec<&str> = g.difference(&e).map(|s| s.as_str()).collect();
    if missing.is_empty() && extra.is_empty() {
        String::from("columns are in a different order")
    } else {
        format!("missing columns {missing:?}, unexpected columns {extra:?}")
    }
}

/// Features of one account for the selected families.
pub fn account_features(
    timeline: &PlayerTimeline,
    layout: &WindowLayout,
    catalog: &EventCatalog,
    families: &BTreeSet<Family>,
) -> Vec<(String, f64)> {
    let series = daily_series(timeline, layout, catalog);
    let mut out = Vec::new();
    if families.contains(&Family::DailyStats) || families.contains(&Family::Overall) {
        for (name, v) in overall_features(&series, timeline, layout) {
            let keep = (name.starts_with(STAT_PREFIX) && families.contains(&Family::DailyStats))
                || (name.starts_with(OVERALL_PREFIX) && families.contains(&Family::Overall));
            if keep {
                out.push((name, v));
            }
        }
    }
    if families.contains(&Family::Weekly) {
        out.extend(weekly_features(&series));
    }
    if families.contains(&Family::TimeWeighted) {
        out.extend(time_weighted(&series));
    }
    if families.contains(&Family::Frequency) {
        let n = series.n_days();
        for (name, values) in series.channels.iter().zip(&series.values) {
            let (bin, amplitude) = dominant_frequency(values, true);
            // Period in days keeps windows of different length comparable.
            let period = if bin == 0 { 0.0 } else { n as f64 / bin as f64 };
            out.push((format!("freq.{name}.period_days"), period));
            out.push((format!("freq.{name}.amplitude"), amplitude));
        }
    }
    out
}

/// How quantile maps take part in a build.
#[derive(Debug, Clone, Copy)]
pub enum Quantile<'a> {
    Off,
    /// Fit maps on this (training) matrix and transform it.
    Fit,
    /// Transform with maps fit earlier on a training matrix.
    Apply(&'a QuantileTransform),
}

/// Builds the feature matrix for a cohort, one row per timeline in the given
/// order.
pub fn build_matrix(
    timelines: &[PlayerTimeline],
    layout: &WindowLayout,
    catalog: &EventCatalog,
    families: &BTreeSet<Family>,
    quantile: Quantile<'_>,
) -> Result<(FeatureMatrix, Option<QuantileTransform>)> {
    if timelines.is_empty() {
        return Err(Error::Cardinality("feature cohort is empty".into()));
    }
    if families.is_empty() {
        return Err(Error::Config("no feature family selected".into()));
    }
    let rows = timelines
        .iter()
        .map(|t| (String::from(t.account_id()), account_features(t, layout, catalog, families)))
        .collect();
    finish_matrix(rows, quantile)
}

/// Assembles named rows (possibly computed in parallel) and applies the
/// quantile step.
pub fn finish_matrix(
    rows: Vec<(String, Vec<(String, f64)>)>,
    quantile: Quantile<'_>,
) -> Result<(FeatureMatrix, Option<QuantileTransform>)> {
    let raw = FeatureMatrix::from_named_rows(rows)?;
    match quantile {
        Quantile::Off => Ok((raw, None)),
        Quantile::Fit => {
            let q = QuantileTransform::fit(&raw)?;
            let m = q.apply(&raw)?;
            Ok((m, Some(q)))
        }
        Quantile::Apply(q) => Ok((q.apply(&raw)?, None)),
    }
}
