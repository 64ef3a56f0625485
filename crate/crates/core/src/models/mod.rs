//! Baseline learners: elastic-net logistic regression, ridge regression and
//! extremely randomized trees for classification and regression.

mod linear;
mod trees;

pub use linear::{
    fit_logistic, fit_logistic_traced, fit_ridge, FitTrace, LinearKind, LinearModel, LogisticObjective, Standardization,
};
pub use trees::{fit_extra_trees, fit_tree, gini, ExtraTreesModel, Leaf, Node, Target, TreeTask};

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{schema_diff, FeatureMatrix};

/// Version stamped into every serialized model.
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Hyperparameters shared by all learners.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub l1: f64,
    pub l2: f64,
    pub max_iters: usize,
    pub tol: f64,
    pub n_trees: usize,
    pub min_samples_split: usize,
    /// Candidate features per node; `None` picks the task default.
    pub k_features: Option<usize>,
    pub seed: u64,
    pub standardize: bool,
    pub fit_intercept: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            l1: 0.0,
            l2: 0.01,
            max_iters: 5000,
            tol: 1e-7,
            n_trees: 50,
            min_samples_split: 50,
            k_features: None,
            seed: 0,
            standardize: true,
            fit_intercept: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.l1 >= 0.0 && self.l1.is_finite()) {
            return Err(Error::Config(format!("l1 must be finite and >= 0, got {}", self.l1)));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(Error::Config(format!("l2 must be finite and >= 0, got {}", self.l2)));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::Config(format!("tol must be > 0, got {}", self.tol)));
        }
        if self.n_trees == 0 {
            return Err(Error::Config("n_trees must be >= 1".into()));
        }
        if self.min_samples_split < 2 {
            return Err(Error::Config("min_samples_split must be >= 2".into()));
        }
        if self.k_features == Some(0) {
            return Err(Error::Config("k_features must be >= 1".into()));
        }
        Ok(())
    }
}

/// Any trained model, tagged by kind in its serialized form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum Model {
    Logistic(LinearModel),
    Ridge(LinearModel),
    ExtraTrees(ExtraTreesModel),
}

impl Model {
    pub fn columns(&self) -> &[String] {
        match self {
            Model::Logistic(m) | Model::Ridge(m) => &m.columns,
            Model::ExtraTrees(m) => &m.columns,
        }
    }

    pub fn format_version(&self) -> u32 {
        match self {
            Model::Logistic(m) | Model::Ridge(m) => m.format_version,
            Model::ExtraTrees(m) => m.format_version,
        }
    }

    /// True when the output is a class probability.
    pub fn is_classifier(&self) -> bool {
        match self {
            Model::Logistic(_) => true,
            Model::Ridge(_) => false,
            Model::ExtraTrees(m) => m.task == TreeTask::Classification,
        }
    }

    pub fn check_schema(&self, x: &FeatureMatrix) -> Result<()> {
        if self.columns() != x.columns() {
            return Err(Error::Schema(schema_diff(self.columns(), x.columns())));
        }
        Ok(())
    }

    /// Probability or regression value for one row in training column order.
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        match self {
            Model::Logistic(m) | Model::Ridge(m) => m.predict_row(row),
            Model::ExtraTrees(m) => m.predict_row(row),
        }
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        self.check_schema(x)?;
        Ok(x.rows().iter().map(|r| self.predict_row(r)).collect())
    }
}

/// Class decisions from probabilities.
pub fn classify(scores: &[f64], threshold: f64) -> Vec<bool> {
    scores.iter().map(|&p| p >= threshold).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn matrix(rows: Vec<Vec<f64>>) -> FeatureMatrix {
        let d = rows.first().map_or(0, Vec::len);
        let accounts = (0..rows.len()).map(|i| format!("r{i:05}")).collect();
        let columns = (0..d).map(|j| format!("c{j}")).collect();
        FeatureMatrix::new(accounts, columns, rows).unwrap()
    }

    fn plain() -> TrainConfig {
        TrainConfig { l2: 0.0, ..TrainConfig::default() }
    }

    #[test]
    fn logistic_symmetric_pair() {
        let x = matrix(vec![vec![-1.0], vec![1.0]]);
        let cfg = TrainConfig { max_iters: 200, ..plain() };
        let m = fit_logistic(&x, &[false, true], &cfg).unwrap();
        assert!(m.weights[0] > 0.0);
        assert!((m.predict_row(&[0.0]) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn huge_l1_zeroes_weights() {
        let x = matrix((0..40).map(|i| vec![i as f64, (i * i % 7) as f64]).collect());
        let y: Vec<bool> = (0..40).map(|i| i % 4 == 0 || i > 30).collect();
        let m = fit_logistic(&x, &y, &TrainConfig { l1: 1e6, ..plain() }).unwrap();
        assert_eq!(m.weights, vec![0.0, 0.0]);
        let p = y.iter().filter(|&&b| b).count() as f64 / 40.0;
        assert!((m.intercept - libm::log(p / (1.0 - p))).abs() < 1e-12);
    }

    fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        let r = (libm::sqrt(5.0) - 1.0) / 2.0;
        while b - a > 1e-9 {
            let c = b - r * (b - a);
            let d = a + r * (b - a);
            if f(c) < f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        (a + b) / 2.0
    }

    #[test]
    fn separable_with_l2_matches_scan() {
        let xs = [-2.0, -1.0, 1.0, 2.0];
        let x = matrix(xs.iter().map(|v| vec![*v]).collect());
        let y = [false, false, true, true];
        let cfg = TrainConfig { l2: 1.0, tol: 1e-12, max_iters: 100_000, ..TrainConfig::default() };
        let m = fit_logistic(&x, &y, &cfg).unwrap();
        // Symmetric data puts the intercept at 0, leaving a 1-D problem.
        let sd = libm::sqrt(xs.iter().map(|v| v * v).sum::<f64>() / 4.0);
        let objective = |w: f64| {
            xs.iter()
                .zip(&y)
                .map(|(x, &t)| {
                    let z = w * x / sd;
                    libm::log(1.0 + libm::exp(z)) - if t { z } else { 0.0 }
                })
                .sum::<f64>()
                / 4.0
                + 0.5 * w * w
        };
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..=50_000 {
            let w = k as f64 * 1e-4;
            let v = objective(w);
            if v < best.0 {
                best = (v, w);
            }
        }
        assert!((m.weights[0] - best.1).abs() <= 1e-4, "{} vs {}", m.weights[0], best.1);
        assert!((m.weights[0] - golden_min(objective, 0.0, 5.0)).abs() < 1e-6);
        assert!(m.intercept.abs() < 1e-9);
    }

    #[test]
    fn degenerate_and_invalid_inputs() {
        let x = matrix(vec![vec![1.0], vec![2.0]]);
        assert_eq!(fit_logistic(&x, &[true, true], &plain()).unwrap_err().kind(), "degenerate_labels");
        let bad = TrainConfig { tol: 0.0, ..plain() };
        assert_eq!(fit_logistic(&x, &[true, false], &bad).unwrap_err().kind(), "config_error");
    }

    #[test]
    fn zero_weight_model_is_half() {
        let m = LinearModel {
            format_version: MODEL_FORMAT_VERSION,
            kind: LinearKind::Logistic,
            columns: vec!["a".into()],
            weights: vec![0.0],
            intercept: 0.0,
            standardization: Standardization { means: vec![0.0], stds: vec![1.0] },
            config: TrainConfig::default(),
        };
        assert_eq!(m.predict_row(&[123.0]), 0.5);
    }

    fn random_rows(seed: u64, n: usize, d: usize) -> Vec<Vec<f64>> {
        use rand::Rng;
        let mut rng = crate::seed::stream(seed, "test", 0);
        (0..n).map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect()).collect()
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let rows = random_rows(3, 60, 3);
        let y: Vec<bool> = rows.iter().map(|r| r[0] + 0.5 * r[1] - r[2] > 0.3).collect();
        let obj = LogisticObjective::new(rows, &y, 0.1);
        let w = [0.3, -0.7, 1.1];
        let b = 0.2;
        let (gw, gb) = obj.gradient(&w, b);
        let h = 1e-6;
        for j in 0..3 {
            let mut up = w;
            let mut dn = w;
            up[j] += h;
            dn[j] -= h;
            let fd = (obj.value(&up, b) - obj.value(&dn, b)) / (2.0 * h);
            assert!((fd - gw[j]).abs() <= 1e-4 * gw[j].abs().max(1e-3), "{fd} vs {}", gw[j]);
        }
        let fd = (obj.value(&w, b + h) - obj.value(&w, b - h)) / (2.0 * h);
        assert!((fd - gb).abs() <= 1e-4 * gb.abs().max(1e-3));
    }

    #[test]
    fn optimum_gradient_is_small() {
        let rows = random_rows(5, 80, 3);
        let y: Vec<bool> =
            rows.iter().enumerate().map(|(i, r)| r[0] - r[2] + if i % 5 == 0 { 3.0 } else { 0.0 } > 0.5).collect();
        let x = matrix(rows);
        let cfg = TrainConfig { l2: 0.0, tol: 1e-8, max_iters: 200_000, ..TrainConfig::default() };
        let (m, trace) = fit_logistic_traced(&x, &y, &cfg).unwrap();
        assert!(trace.converged);
        for pair in trace.objective.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12 * pair[0].abs());
        }
        let z: Vec<Vec<f64>> = x.rows().iter().map(|r| m.standardization.transform_row(r)).collect();
        let (gw, gb) = LogisticObjective::new(z, &y, 0.0).gradient(&m.weights, m.intercept);
        let inf = gw.iter().chain(core::iter::once(&gb)).fold(0.0f64, |a, g| a.max(g.abs()));
        assert!(inf < 10.0 * cfg.tol, "{inf}");
    }

    #[test]
    fn ridge_identity_bypass() {
        let x = matrix(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let cfg = TrainConfig { l2: 1.0, standardize: false, fit_intercept: false, ..TrainConfig::default() };
        let m = fit_ridge(&x, &[1.0, 2.0], &cfg).unwrap();
        assert!((m.weights[0] - 0.5).abs() < 1e-12 && (m.weights[1] - 1.0).abs() < 1e-12);
        assert!((m.predict_row(&[2.0, 2.0]) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn ridge_interpolates_and_handles_constant_targets() {
        let x = matrix(vec![vec![2.0, 1.0, 0.0], vec![1.0, 3.0, 1.0], vec![0.0, 1.0, 4.0]]);
        let y = [1.0, -2.0, 0.5];
        let cfg = TrainConfig { l2: 0.0, standardize: false, fit_intercept: false, ..TrainConfig::default() };
        let m = fit_ridge(&x, &y, &cfg).unwrap();
        for (r, t) in x.rows().iter().zip(&y) {
            assert!((m.predict_row(r) - t).abs() < 1e-8);
        }
        let m = fit_ridge(&x, &[4.0; 3], &TrainConfig::default()).unwrap();
        assert!(m.weights.iter().all(|w| w.abs() < 1e-12));
        assert_eq!(m.intercept, 4.0);
    }

    #[test]
    fn ridge_rank_deficient_without_penalty() {
        let x = matrix(vec![vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]]);
        let err = fit_ridge(&x, &[1.0, 2.0, 3.0], &plain()).unwrap_err();
        assert_eq!(err.kind(), "singular_system");
        assert!(alloc::string::ToString::to_string(&err).contains("l2 > 0"));
    }

    #[test]
    fn gini_anchors() {
        assert_eq!(gini([2, 2]), 0.5);
        assert_eq!(gini([4, 0]), 0.0);
        assert!((gini([3, 1]) - 0.375).abs() < 1e-15);
    }

    #[test]
    fn trees_fit_binary_step() {
        let x = matrix((0..20).map(|i| vec![(i % 2) as f64]).collect());
        let y: Vec<bool> = (0..20).map(|i| i % 2 == 1).collect();
        let cfg = TrainConfig { min_samples_split: 2, ..TrainConfig::default() };
        let m = fit_extra_trees(&x, Target::Binary(&y), &cfg).unwrap();
        assert_eq!(m.trees.len(), 50);
        for (r, t) in x.rows().iter().zip(&y) {
            assert_eq!(m.predict_row(r), if *t { 1.0 } else { 0.0 });
        }
    }

    fn check_structure(node: &Node, min_split: usize) -> u32 {
        match node {
            Node::Leaf(l) => {
                assert!(l.n >= 1);
                l.n
            }
            Node::Split { left, right, .. } => {
                let n = check_structure(left, min_split) + check_structure(right, min_split);
                assert!(n as usize >= min_split);
                n
            }
        }
    }

    #[test]
    fn tree_structure_invariants_and_determinism() {
        let rows = random_rows(11, 300, 6);
        let y: Vec<f64> = rows.iter().map(|r| r[0] * 2.0 + r[3]).collect();
        let x = matrix(rows);
        let cfg = TrainConfig { min_samples_split: 10, n_trees: 8, seed: 4, ..TrainConfig::default() };
        let m = fit_extra_trees(&x, Target::Real(&y), &cfg).unwrap();
        assert_eq!(m.k_features, 2);
        for t in &m.trees {
            assert_eq!(check_structure(t, 10), 300);
        }
        assert_eq!(m, fit_extra_trees(&x, Target::Real(&y), &cfg).unwrap());
        let err = fit_extra_trees(&matrix(Vec::new()), Target::Real(&[]), &cfg).unwrap_err();
        assert_eq!(err.kind(), "validation_error");
    }

    #[test]
    fn schema_mismatch_names_columns() {
        let x = matrix(vec![vec![0.0], vec![1.0]]);
        let m = Model::Ridge(fit_ridge(&x, &[0.0, 1.0], &TrainConfig::default()).unwrap());
        let other = FeatureMatrix::new(vec!["a".into()], vec!["zz".into()], vec![vec![1.0]]).unwrap();
        let err = m.predict(&other).unwrap_err();
        assert_eq!(err.kind(), "schema_error");
        assert!(alloc::string::ToString::to_string(&err).contains("zz"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn trees_ignore_row_order(seed in any::<u64>(), rot in 1usize..59) {
            let rows = random_rows(seed, 60, 4);
            let y: Vec<bool> = rows.iter().map(|r| r[1] > 0.0).collect();
            let x = matrix(rows.clone());
            let cfg = TrainConfig { n_trees: 5, min_samples_split: 4, seed, ..TrainConfig::default() };
            let base = fit_extra_trees(&x, Target::Binary(&y), &cfg).unwrap();
            let mut idx: Vec<usize> = (0..60).collect();
            idx.rotate_left(rot);
            let shuffled = FeatureMatrix::new(
                idx.iter().map(|&i| x.accounts()[i].clone()).collect(),
                x.columns().to_vec(),
                idx.iter().map(|&i| rows[i].clone()).collect(),
            ).unwrap();
            let ys: Vec<bool> = idx.iter().map(|&i| y[i]).collect();
            let other = fit_extra_trees(&shuffled, Target::Binary(&ys), &cfg).unwrap();
            prop_assert_eq!(base.trees, other.trees);
        }

        #[test]
        fn linear_predictions_affine_invariant(seed in any::<u64>(), scale in 0.01f64..100.0, shift in -50.0f64..50.0, col in 0usize..3) {
            let rows = random_rows(seed, 40, 3);
            let yb: Vec<bool> = rows.iter().enumerate().map(|(i, r)| r[0] + r[1] + if i % 3 == 0 { 1.5 } else { 0.0 } > 0.5).collect();
            let yr: Vec<f64> = rows.iter().map(|r| r[0] - 2.0 * r[2]).collect();
            let moved: Vec<Vec<f64>> = rows.iter().map(|r| {
                let mut r = r.clone();
                r[col] = r[col] * scale + shift;
                r
            }).collect();
            let (a, b) = (matrix(rows), matrix(moved));
            let cfg = TrainConfig { tol: 1e-12, max_iters: 50_000, l2: 0.1, ..TrainConfig::default() };
            let ra = fit_ridge(&a, &yr, &cfg).unwrap();
            let rb = fit_ridge(&b, &yr, &cfg).unwrap();
            let la = fit_logistic(&a, &yb, &cfg).unwrap();
            let lb = fit_logistic(&b, &yb, &cfg).unwrap();
            for (r1, r2) in a.rows().iter().zip(b.rows()) {
                prop_assert!((ra.predict_row(r1) - rb.predict_row(r2)).abs() < 1e-8);
                prop_assert!((la.predict_row(r1) - lb.predict_row(r2)).abs() < 1e-8);
            }
        }
    }
}
