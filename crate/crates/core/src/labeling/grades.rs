use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// Number of loyalty grades.
pub const DEFAULT_GRADES: usize = 14;
const MAX_LLOYD_ITERATIONS: usize = 100;

/// Monthly per-account inputs to loyalty grading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoyaltyFeatures {
    pub payment: f64,
    pub playtime: f64,
    pub usage_rate: f64,
}

impl LoyaltyFeatures {
    fn as_array(&self) -> [f64; 3] {
        [self.payment, self.playtime, self.usage_rate]
    }
}

/// Grades for one month. Grade 1 is the most loyal cluster.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GradeAssignment {
    pub grades: BTreeMap<String, u8>,
    pub diagnostics: Vec<String>,
}

/// Grades of every account across months, keyed by month number.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GradeTable {
    pub months: BTreeMap<u32, BTreeMap<String, u8>>,
}

impl GradeTable {
    pub fn insert_month(&mut self, month: u32, assignment: &GradeAssignment) {
        self.months.insert(month, assignment.grades.clone());
    }
}

/// Clusters accounts into `k` loyalty grades with k-means.
///
/// Features are z-scored per column and rows are processed in account-id
/// order, so the result does not depend on input order. Seeding is k-means++
/// (D² sampling) from the `seed` stream; Lloyd iterations run until the
/// assignment is stable or 100 rounds. Clusters are ranked by the sum of their
/// standardized centroid coordinates, highest first.
pub fn assign_grades(rows: &[(String, LoyaltyFeatures)], k: usize, seed: u64) -> Result<GradeAssignment> {
    if k == 0 || k > usize::from(u8::MAX) {
        return Err(Error::Config(format!("grade count {k} out of range")));
    }
    if rows.len() < k {
        return Err(Error::Cardinality(format!("{} accounts cannot fill {k} grades", rows.len())));
    }
    let mut ordered: Vec<(&str, [f64; 3])> = rows.iter().map(|(a, f)| (a.as_str(), f.as_array())).collect();
    if ordered.iter().any(|(_, f)| f.iter().any(|v| !v.is_finite())) {
        return Err(Error::Validation("loyalty features must be finite".into()));
    }
    ordered.sort_by(|a, b| a.0.cmp(b.0));
    for pair in ordered.windows(2) {
        if pair[0].0 == pair[1].0 {
            return Err(Error::Validation(format!("account {} graded twice", pair[0].0)));
        }
    }

    let mut out = GradeAssignment::default();
    let first = ordered[0].1;
    if ordered.iter().all(|(_, f)| *f == first) {
        out.diagnostics.push("all feature rows identical; every account assigned grade 1".into());
        out.grades = ordered.iter().map(|(a, _)| (String::from(*a), 1)).collect();
        return Ok(out);
    }

    let points = standardize(&ordered.iter().map(|(_, f)| *f).collect::<Vec<_>>());
    let mut rng = seed::stream(seed, "kmeans", 0);
    let mut centroids = seed_centroids(&points, k, &mut rng);
    let mut assignment = vec![usize::MAX; points.len()];
    for _ in 0..MAX_LLOYD_ITERATIONS {
        let mut changed = false;
        for (slot, p) in assignment.iter_mut().zip(&points) {
            let best = nearest(p, &centroids).0;
            if *slot != best {
                *slot = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![[0.0f64; 3]; k];
        let mut counts = vec![0usize; k];
        for (&c, p) in assignment.iter().zip(&points) {
            counts[c] += 1;
            for d in 0..3 {
                sums[c][d] += p[d];
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for d in 0..3 {
                    centroids[c][d] = sums[c][d] / counts[c] as f64;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..k).collect();
    let score = |c: usize| centroids[c].iter().sum::<f64>();
    order.sort_by(|&a, &b| score(b).total_cmp(&score(a)).then(a.cmp(&b)));
    let mut grade_of = vec![0u8; k];
    for (rank, &c) in order.iter().enumerate() {
        grade_of[c] = (rank + 1) as u8;
    }
    out.grades = ordered.iter().zip(&assignment).map(|((a, _), &c)| (String::from(*a), grade_of[c])).collect();
    Ok(out)
}

fn standardize(rows: &[[f64; 3]]) -> Vec<[f64; 3]> {
    let n = rows.len() as f64;
    let mut mean = [0.0; 3];
    let mut std = [0.0; 3];
    for d in 0..3 {
        mean[d] = rows.iter().map(|r| r[d]).sum::<f64>() / n;
        let var = rows.iter().map(|r| (r[d] - mean[d]) * (r[d] - mean[d])).sum::<f64>() / n;
        std[d] = libm::sqrt(var);
    }
    rows.iter()
        .map(|r| {
            let mut z = [0.0; 3];
            for d in 0..3 {
                z[d] = if std[d] > 0.0 { (r[d] - mean[d]) / std[d] } else { 0.0 };
            }
            z
        })
        .collect()
}

fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (0..3).map(|d| (a[d] - b[d]) * (a[d] - b[d])).sum()
}

fn nearest(p: &[f64; 3], centroids: &[[f64; 3]]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centroids.iter().enumerate() {
        let d = dist2(p, c);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

fn seed_centroids(points: &[[f64; 3]], k: usize, rng: &mut impl Rng) -> Vec<[f64; 3]> {
    let mut centroids = Vec::with_capacity(k);
    centroids.push(points[rng.random_range(0..points.len())]);
    while centroids.len() < k {
        let weights: Vec<f64> = points.iter().map(|p| nearest(p, &centroids).1).collect();
        let total: f64 = weights.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut idx = points.len() - 1;
            for (i, w) in weights.iter().enumerate() {
                if *w > 0.0 && target < *w {
                    idx = i;
                    break;
                }
                target -= w;
            }
            idx
        } else {
            rng.random_range(0..points.len())
        };
        centroids.push(points[pick]);
    }
    centroids
}

/// Accounts that reached `threshold_grade` or better in at least
/// `min_occurrences` of the last `trailing_months` months of the table.
pub fn select_loyal(
    table: &GradeTable,
    trailing_months: usize,
    threshold_grade: u8,
    min_occurrences: usize,
) -> BTreeSet<String> {
    let mut hits: BTreeMap<&str, usize> = BTreeMap::new();
    for grades in table.months.values().rev().take(trailing_months) {
        for (account, &grade) in grades {
            let count = hits.entry(account.as_str()).or_insert(0);
            if grade <= threshold_grade {
                *count += 1;
            }
        }
    }
    hits.into_iter().filter(|(_, n)| *n >= min_occurrences.max(1)).map(|(a, _)| String::from(a)).collect()
}
