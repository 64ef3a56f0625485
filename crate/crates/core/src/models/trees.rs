use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{TrainConfig, MODEL_FORMAT_VERSION};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::seed::stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeTask {
    Classification,
    Regression,
}

/// Training targets, aligned to matrix rows.
#[derive(Debug, Clone, Copy)]
pub enum Target<'a> {
    Binary(&'a [bool]),
    Real(&'a [f64]),
}

impl Target<'_> {
    fn len(&self) -> usize {
        match self {
            Target::Binary(y) => y.len(),
            Target::Real(y) => y.len(),
        }
    }

    fn task(&self) -> TreeTask {
        match self {
            Target::Binary(_) => TreeTask::Classification,
            Target::Real(_) => TreeTask::Regression,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leaf {
    pub n: u32,
    /// Positive-class frequency for classification, target mean for regression.
    pub value: f64,
    /// `[negatives, positives]` for classification leaves.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub counts: Option<[u32; 2]>,
}

/// Rows with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Node {
    Split { feature: usize, threshold: f64, left: Box<Node>, right: Box<Node> },
    Leaf(Leaf),
}

impl Node {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                Node::Split { feature, threshold, left, right } => {
                    node = if row[*feature] <= *threshold { left } else { right };
                }
                Node::Leaf(leaf) => return leaf.value,
            }
        }
    }

    /// Visits every node depth-first, left before right.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a Node)) {
        visit(self);
        if let Node::Split { left, right, .. } = self {
            left.walk(visit);
            right.walk(visit);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtraTreesModel {
    pub format_version: u32,
    pub task: TreeTask,
    pub columns: Vec<String>,
    pub n_trees: usize,
    pub min_samples_split: usize,
    pub k_features: usize,
    pub seed: u64,
    pub trees: Vec<Node>,
}

impl ExtraTreesModel {
    /// Mean of leaf values across trees.
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(row)).sum::<f64>() / self.trees.len() as f64
    }

    /// Wraps independently grown trees, e.g. from a parallel driver.
    pub fn from_trees(x: &FeatureMatrix, task: TreeTask, cfg: &TrainConfig, trees: Vec<Node>) -> Self {
        ExtraTreesModel {
            format_version: MODEL_FORMAT_VERSION,
            task,
            columns: x.columns().to_vec(),
            n_trees: cfg.n_trees,
            min_samples_split: cfg.min_samples_split,
            k_features: resolve_k(cfg, task, x.n_cols()),
            seed: cfg.seed,
            trees,
        }
    }
}

/// Gini impurity of two-class counts.
pub fn gini(counts: [u32; 2]) -> f64 {
    let n = f64::from(counts[0] + counts[1]);
    if n == 0.0 {
        return 0.0;
    }
    let p0 = f64::from(counts[0]) / n;
    let p1 = f64::from(counts[1]) / n;
    1.0 - p0 * p0 - p1 * p1
}

fn resolve_k(cfg: &TrainConfig, task: TreeTask, d: usize) -> usize {
    let default = match task {
        TreeTask::Classification => libm::ceil(libm::sqrt(d as f64)) as usize,
        TreeTask::Regression => d.div_ceil(3),
    };
    cfg.k_features.unwrap_or(default).clamp(1, d.max(1))
}

struct Grower<'a> {
    rows: &'a [Vec<f64>],
    target: Target<'a>,
    min_split: usize,
    k: usize,
    rng: ChaCha8Rng,
    features: Vec<usize>,
}

/// Impurity totals of a sample set: weighted Gini or sum of squared deviations.
#[derive(Clone, Copy, Default)]
struct Stats {
    n: u32,
    pos: u32,
    sum: f64,
    sum_sq: f64,
}

impl Stats {
    fn push(&mut self, target: Target<'_>, i: usize) {
        self.n += 1;
        match target {
            Target::Binary(y) => self.pos += u32::from(y[i]),
            Target::Real(y) => {
                self.sum += y[i];
                self.sum_sq += y[i] * y[i];
            }
        }
    }

    /// Node impurity times sample count, so children add up.
    fn weighted_impurity(&self, task: TreeTask) -> f64 {
        let n = f64::from(self.n);
        match task {
            TreeTask::Classification => n * gini([self.n - self.pos, self.pos]),
            TreeTask::Regression => (self.sum_sq - self.sum * self.sum / n.max(1.0)).max(0.0),
        }
    }
}

impl Grower<'_> {
    fn leaf(&self, idx: &[usize]) -> Node {
        let n = idx.len() as u32;
        match self.target {
            Target::Binary(y) => {
                let pos = idx.iter().filter(|&&i| y[i]).count() as u32;
                Node::Leaf(Leaf { n, value: f64::from(pos) / f64::from(n), counts: Some([n - pos, pos]) })
            }
            Target::Real(y) => {
                let mean = idx.iter().map(|&i| y[i]).sum::<f64>() / f64::from(n);
                Node::Leaf(Leaf { n, value: mean, counts: None })
            }
        }
    }

    fn is_pure(&self, idx: &[usize]) -> bool {
        match self.target {
            Target::Binary(y) => idx.iter().all(|&i| y[i] == y[idx[0]]),
            Target::Real(y) => idx.iter().all(|&i| y[i] == y[idx[0]]),
        }
    }

    fn grow(&mut self, idx: Vec<usize>) -> Node {
        if idx.len() < self.min_split || self.is_pure(&idx) {
            return self.leaf(&idx);
        }
        let task = self.target.task();
        let mut parent = Stats::default();
        for &i in &idx {
            parent.push(self.target, i);
        }
        let parent_impurity = parent.weighted_impurity(task);

        // Partial Fisher-Yates over the feature list; constant features are
        // skipped until k usable candidates are drawn or the list runs out.
        let d = self.features.len();
        let mut best: Option<(f64, usize, f64)> = None;
        let mut drawn = 0;
        let mut usable = 0;
        while usable < self.k && drawn < d {
            let pick = self.rng.random_range(drawn..d);
            self.features.swap(drawn, pick);
            let f = self.features[drawn];
            drawn += 1;
            let (lo, hi) = idx.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                let v = self.rows[i][f];
                (lo.min(v), hi.max(v))
            });
            if lo >= hi {
                continue;
            }
            usable += 1;
            let threshold = self.rng.random_range(lo..hi);
            let mut left = Stats::default();
            for &i in &idx {
                if self.rows[i][f] <= threshold {
                    left.push(self.target, i);
                }
            }
            let right = Stats {
                n: parent.n - left.n,
                pos: parent.pos - left.pos,
                sum: parent.sum - left.sum,
                sum_sq: parent.sum_sq - left.sum_sq,
            };
            let decrease = parent_impurity - left.weighted_impurity(task) - right.weighted_impurity(task);
            if best.is_none_or(|(b, _, _)| decrease > b) {
                best = Some((decrease, f, threshold));
            }
        }
        let Some((_, feature, threshold)) = best else {
            return self.leaf(&idx);
        };
        let (left, right): (Vec<usize>, Vec<usize>) =
            idx.into_iter().partition(|&i| self.rows[i][feature] <= threshold);
        let left = self.grow(left);
        let right = self.grow(right);
        Node::Split { feature, threshold, left: Box::new(left), right: Box::new(right) }
    }
}

fn check_inputs(x: &FeatureMatrix, target: Target<'_>) -> Result<()> {
    if x.n_rows() == 0 || x.n_cols() == 0 {
        return Err(Error::Validation("extra-trees needs a non-empty matrix".into()));
    }
    if target.len() != x.n_rows() {
        return Err(Error::Length(format!("{} targets for {} rows", target.len(), x.n_rows())));
    }
    if let Target::Real(y) = target {
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("non-finite regression target".into()));
        }
    }
    Ok(())
}

/// Grows tree `tree_index` on the full training set. Rows are visited in
/// account order so the result does not depend on input row order.
pub fn fit_tree(x: &FeatureMatrix, target: Target<'_>, cfg: &TrainConfig, tree_index: usize) -> Result<Node> {
    cfg.validate()?;
    check_inputs(x, target)?;
    let mut order: Vec<usize> = (0..x.n_rows()).collect();
    order.sort_by(|&a, &b| x.accounts()[a].cmp(&x.accounts()[b]));
    let mut grower = Grower {
        rows: x.rows(),
        target,
        min_split: cfg.min_samples_split,
        k: resolve_k(cfg, target.task(), x.n_cols()),
        rng: stream(cfg.seed, "tree", tree_index as u64),
        features: (0..x.n_cols()).collect(),
    };
    Ok(grower.grow(order))
}

pub fn fit_extra_trees(x: &FeatureMatrix, target: Target<'_>, cfg: &TrainConfig) -> Result<ExtraTreesModel> {
    let trees = (0..cfg.n_trees).map(|t| fit_tree(x, target, cfg, t)).collect::<Result<Vec<_>>>()?;
    Ok(ExtraTreesModel::from_trees(x, target.task(), cfg, trees))
}
