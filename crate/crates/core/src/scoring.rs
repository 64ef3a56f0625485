//! Competition scoring: F1 for churn, censoring-aware RMSLE for survival,
//! harmonic-mean final scores and the public/private leaderboard split.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labeling::SurvivalLabel;
use crate::seed::keyed_hash;

/// Share of the test cohort scored by the interim test server.
pub const PUBLIC_FRACTION: f64 = 0.10;

/// F1 from precision and recall; 0 when both are 0.
pub fn f1_from(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub diagnostics: Vec<String>,
}

impl ClassificationScore {
    /// Scores confusion counts with churned as the positive class.
    pub fn from_counts(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        let mut diagnostics = Vec::new();
        let precision = if tp + fp > 0 {
            tp as f64 / (tp + fp) as f64
        } else {
            diagnostics.push(String::from("no predicted positives; precision set to 0"));
            0.0
        };
        let recall = if tp + fn_ > 0 {
            tp as f64 / (tp + fn_) as f64
        } else {
            diagnostics.push(String::from("no actual positives; recall set to 0"));
            0.0
        };
        ClassificationScore { precision, recall, f1: f1_from(precision, recall), tp, fp, fn_, tn, diagnostics }
    }
}

fn missing_error<'a>(missing: impl Iterator<Item = &'a String>) -> Option<Error> {
    let ids: Vec<&str> = missing.map(String::as_str).collect();
    if ids.is_empty() {
        return None;
    }
    let shown: Vec<&str> = ids.iter().take(10).copied().collect();
    Some(Error::Coverage(format!(
        "{} accounts without prediction: {}{}",
        ids.len(),
        shown.join(", "),
        if ids.len() > 10 { ", ..." } else { "" }
    )))
}

/// Confusion-matrix scoring over every account in `actual`. Predictions for
/// accounts outside `actual` are ignored.
pub fn score_classification(
    predicted: &BTreeMap<String, bool>,
    actual: &BTreeMap<String, bool>,
) -> Result<ClassificationScore> {
    if let Some(e) = missing_error(actual.keys().filter(|a| !predicted.contains_key(*a))) {
        return Err(e);
    }
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for (account, &truth) in actual {
        match (predicted[account], truth) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    Ok(ClassificationScore::from_counts(tp, fp, fn_, tn))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalScore {
    pub rmsle: f64,
    pub n: u64,
    /// Censored records whose prediction exceeded the observed survival.
    pub clamped_count: u64,
}

/// Root mean squared log error with natural logarithms. For a censored
/// actual, a prediction at or above the observed value counts as exact.
pub fn score_survival(
    predicted: &BTreeMap<String, f64>,
    actual: &BTreeMap<String, SurvivalLabel>,
) -> Result<SurvivalScore> {
    if let Some(e) = missing_error(actual.keys().filter(|a| !predicted.contains_key(*a))) {
        return Err(e);
    }
    if actual.is_empty() {
        return Err(Error::Cardinality("no survival records to score".into()));
    }
    let mut sum = 0.0;
    let mut clamped_count = 0;
    for (account, label) in actual {
        let p = predicted[account];
        if !p.is_finite() || p < 0.0 {
            return Err(Error::Validation(format!("prediction {p} for {account} must be finite and >= 0")));
        }
        let a = f64::from(label.survival_days);
        let p = if label.censored && p >= a {
            if p > a {
                clamped_count += 1;
            }
            a
        } else {
            p
        };
        let d = libm::log1p(p) - libm::log1p(a);
        sum += d * d;
    }
    let n = actual.len() as u64;
    Ok(SurvivalScore { rmsle: libm::sqrt(sum / n as f64), n, clamped_count })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FinalScore {
    pub test1: f64,
    pub test2: f64,
    #[serde(rename = "final")]
    pub final_: f64,
}

/// Harmonic mean of the two per-test-set scores.
pub fn final_score(test1: f64, test2: f64) -> Result<FinalScore> {
    if !(test1 > 0.0 && test2 > 0.0) || !test1.is_finite() || !test2.is_finite() {
        return Err(Error::UndefinedScore(format!("harmonic mean needs positive scores, got {test1} and {test2}")));
    }
    Ok(FinalScore { test1, test2, final_: 2.0 / (1.0 / test1 + 1.0 / test2) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardSplit {
    pub public: BTreeSet<String>,
    pub private: BTreeSet<String>,
    pub seed: u64,
}

/// Ranks accounts by a seed-keyed SHA-256 hash and puts the lowest
/// `round(0.10 n)` in the public part.
pub fn split_leaderboard(cohort: &BTreeSet<String>, seed: u64) -> Result<LeaderboardSplit> {
    let n = cohort.len();
    if n < 10 {
        return Err(Error::Cardinality(format!("leaderboard split needs at least 10 accounts, got {n}")));
    }
    let mut ranked: Vec<(u64, &String)> = cohort.iter().map(|a| (keyed_hash(seed, a), a)).collect();
    ranked.sort();
    let public_n = (n + 5) / 10;
    let public = ranked[..public_n].iter().map(|(_, a)| (*a).clone()).collect();
    let private = ranked[public_n..].iter().map(|(_, a)| (*a).clone()).collect();
    Ok(LeaderboardSplit { public, private, seed })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subset {
    Public,
    Private,
    All,
}

impl FromStr for Subset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "public" => Ok(Subset::Public),
            "private" => Ok(Subset::Private),
            "all" => Ok(Subset::All),
            _ => Err(Error::Config(format!("unknown subset {s:?} (public, private, all)"))),
        }
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Subset::Public => "public",
            Subset::Private => "private",
            Subset::All => "all",
        })
    }
}

/// Submitted predictions in file order.
#[derive(Debug, Clone, PartialEq)]
pub enum Submission {
    Churn(Vec<(String, bool)>),
    Survival(Vec<(String, f64)>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Labels {
    Churn(BTreeMap<String, bool>),
    Survival(BTreeMap<String, SurvivalLabel>),
}

impl Labels {
    fn accounts(&self) -> BTreeSet<String> {
        match self {
            Labels::Churn(m) => m.keys().cloned().collect(),
            Labels::Survival(m) => m.keys().cloned().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub track: u8,
    pub subset: Subset,
    pub n: u64,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    pub classification: Option<ClassificationScore>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rmsle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clamped_count: Option<u64>,
}

impl ScoreReport {
    /// The track's headline number: F1 for churn, RMSLE for survival.
    pub fn headline(&self) -> f64 {
        match (&self.classification, self.rmsle) {
            (Some(c), _) => c.f1,
            (None, Some(r)) => r,
            _ => 0.0,
        }
    }
}

fn index_unique<T: Copy>(entries: &[(String, T)]) -> Result<BTreeMap<String, T>> {
    let mut map = BTreeMap::new();
    for (account, value) in entries {
        if map.insert(account.clone(), *value).is_some() {
            return Err(Error::Format(format!("duplicate account {account} in submission")));
        }
    }
    Ok(map)
}

/// Scores a submission against labels on the chosen leaderboard subset. The
/// split is derived from the label accounts with `seed`.
pub fn score_submission(submission: &Submission, labels: &Labels, subset: Subset, seed: u64) -> Result<ScoreReport> {
    let keep: Option<BTreeSet<String>> = match subset {
        Subset::All => None,
        _ => {
            let split = split_leaderboard(&labels.accounts(), seed)?;
            Some(if subset == Subset::Public { split.public } else { split.private })
        }
    };
    let wanted = |a: &String| keep.as_ref().is_none_or(|k| k.contains(a));
    match (submission, labels) {
        (Submission::Churn(entries), Labels::Churn(actual)) => {
            let predicted = index_unique(entries)?;
            let actual: BTreeMap<String, bool> =
                actual.iter().filter(|(a, _)| wanted(a)).map(|(a, v)| (a.clone(), *v)).collect();
            let score = score_classification(&predicted, &actual)?;
            Ok(ScoreReport {
                track: 1,
                subset,
                n: actual.len() as u64,
                classification: Some(score),
                rmsle: None,
                clamped_count: None,
            })
        }
        (Submission::Survival(entries), Labels::Survival(actual)) => {
            let predicted = index_unique(entries)?;
            let actual: BTreeMap<String, SurvivalLabel> =
                actual.iter().filter(|(a, _)| wanted(a)).map(|(a, v)| (a.clone(), *v)).collect();
            let score = score_survival(&predicted, &actual)?;
            Ok(ScoreReport {
                track: 2,
                subset,
                n: score.n,
                classification: None,
                rmsle: Some(score.rmsle),
                clamped_count: Some(score.clamped_count),
            })
        }
        _ => Err(Error::Config("submission track does not match the label file".into())),
    }
}
