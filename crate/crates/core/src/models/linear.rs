use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{TrainConfig, MODEL_FORMAT_VERSION};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::linalg::{cholesky_solve, Square};

/// Per-column affine map applied before the linear predictor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Standardization {
    /// Column means (when centering) and population stds (when scaling).
    /// Zero-variance columns keep std 1 and are reported as dead.
    pub fn fit(rows: &[Vec<f64>], d: usize, center: bool, scale: bool) -> (Self, Vec<bool>) {
        let n = rows.len().max(1) as f64;
        let mut means = vec![0.0; d];
        let mut stds = vec![1.0; d];
        let mut dead = vec![false; d];
        for j in 0..d {
            let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
            let var = rows.iter().map(|r| (r[j] - mean) * (r[j] - mean)).sum::<f64>() / n;
            let sd = libm::sqrt(var);
            let constant = rows.iter().all(|r| r[j] == rows[0][j]);
            if center {
                means[j] = mean;
            }
            if scale && !constant && sd > 0.0 {
                stds[j] = sd;
            }
            dead[j] = constant && center && !rows.is_empty();
        }
        (Standardization { means, stds }, dead)
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter().zip(self.means.iter().zip(&self.stds)).map(|(x, (m, s))| (x - m) / s).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinearKind {
    Logistic,
    Ridge,
}

/// Weights act on standardized columns; `predict_row` takes raw values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub format_version: u32,
    pub kind: LinearKind,
    pub columns: Vec<String>,
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub standardization: Standardization,
    pub config: TrainConfig,
}

impl LinearModel {
    pub fn linear_predictor(&self, row: &[f64]) -> f64 {
        let s = &self.standardization;
        let mut z = self.intercept;
        for j in 0..self.weights.len() {
            z += self.weights[j] * (row[j] - s.means[j]) / s.stds[j];
        }
        z
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let z = self.linear_predictor(row);
        match self.kind {
            LinearKind::Logistic => sigmoid(z),
            LinearKind::Ridge => z,
        }
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// log(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + libm::log1p(libm::exp(-z))
    } else {
        libm::log1p(libm::exp(z))
    }
}

/// Smooth part of the logistic objective on prepared (standardized) rows:
/// mean negative log-likelihood plus `(l2/2)|w|^2`.
#[derive(Debug, Clone)]
pub struct LogisticObjective {
    rows: Vec<Vec<f64>>,
    y: Vec<f64>,
    l2: f64,
}

impl LogisticObjective {
    pub fn new(rows: Vec<Vec<f64>>, y: &[bool], l2: f64) -> Self {
        LogisticObjective { rows, y: y.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(), l2 }
    }

    fn margins(&self, w: &[f64], b: f64) -> Vec<f64> {
        self.rows.iter().map(|r| b + r.iter().zip(w).map(|(x, w)| x * w).sum::<f64>()).collect()
    }

    /// Upper estimate of the gradient's Lipschitz constant in `(w, b)`, from
    /// power iteration on the augmented design `[rows, 1]`.
    pub fn lipschitz(&self, fit_intercept: bool) -> f64 {
        let d = self.rows.first().map_or(0, Vec::len);
        let n = self.y.len() as f64;
        let mut v = vec![1.0; d + 1];
        if !fit_intercept {
            v[d] = 0.0;
        }
        let mut lambda = 0.0;
        for _ in 0..100 {
            let norm = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
            if norm == 0.0 {
                break;
            }
            v.iter_mut().for_each(|x| *x /= norm);
            let mut next = vec![0.0; d + 1];
            for r in &self.rows {
                let u = r.iter().zip(&v).map(|(x, v)| x * v).sum::<f64>() + v[d];
                for (nx, x) in next.iter_mut().zip(r) {
                    *nx += u * x / n;
                }
                if fit_intercept {
                    next[d] += u / n;
                }
            }
            lambda = v.iter().zip(&next).map(|(a, b)| a * b).sum::<f64>();
            v = next;
        }
        1.05 * lambda / 4.0 + self.l2
    }

    pub fn value(&self, w: &[f64], b: f64) -> f64 {
        let z = self.margins(w, b);
        let nll = z.iter().zip(&self.y).map(|(z, y)| softplus(*z) - y * z).sum::<f64>() / self.y.len() as f64;
        nll + 0.5 * self.l2 * w.iter().map(|w| w * w).sum::<f64>()
    }

    /// Gradient with respect to `(w, b)`.
    pub fn gradient(&self, w: &[f64], b: f64) -> (Vec<f64>, f64) {
        let z = self.margins(w, b);
        let n = self.y.len() as f64;
        let mut gw: Vec<f64> = w.iter().map(|w| self.l2 * w).collect();
        let mut gb = 0.0;
        for ((r, z), y) in self.rows.iter().zip(&z).zip(&self.y) {
            // sigma(z) - 1 = -sigma(-z) keeps mirrored residuals exact.
            let e = if *y > 0.5 { -sigmoid(-z) } else { sigmoid(*z) } / n;
            gb += e;
            for (g, x) in gw.iter_mut().zip(r) {
                *g += e * x;
            }
        }
        (gw, gb)
    }
}

/// Objective values per accepted iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct FitTrace {
    pub objective: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn check_finite(x: &FeatureMatrix) -> Result<()> {
    for (a, r) in x.accounts().iter().zip(x.rows()) {
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation(format!("non-finite feature for {a}")));
        }
    }
    Ok(())
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

pub fn fit_logistic(x: &FeatureMatrix, y: &[bool], cfg: &TrainConfig) -> Result<LinearModel> {
    fit_logistic_traced(x, y, cfg).map(|(m, _)| m)
}

/// Monotone accelerated proximal gradient on
/// `NLL + l1|w|_1 + (l2/2)|w|^2`, intercept unpenalized. Each step starts
/// at the inverse Lipschitz estimate and backtracks on the quadratic bound;
/// a step that would raise the objective is discarded and the momentum reset.
pub fn fit_logistic_traced(x: &FeatureMatrix, y: &[bool], cfg: &TrainConfig) -> Result<(LinearModel, FitTrace)> {
    cfg.validate()?;
    if y.len() != x.n_rows() {
        return Err(Error::Length(format!("{} labels for {} rows", y.len(), x.n_rows())));
    }
    if x.n_rows() < 2 {
        return Err(Error::Cardinality("logistic regression needs at least 2 rows".into()));
    }
    let positives = y.iter().filter(|&&b| b).count();
    if positives == 0 || positives == y.len() {
        return Err(Error::DegenerateLabels("logistic regression needs both classes".into()));
    }
    check_finite(x)?;
    let d = x.n_cols();
    let (std, dead) = Standardization::fit(x.rows(), d, cfg.standardize, cfg.standardize);
    let rows: Vec<Vec<f64>> = x.rows().iter().map(|r| std.transform_row(r)).collect();
    let obj = LogisticObjective::new(rows, y, cfg.l2);
    let penalty = |w: &[f64]| cfg.l1 * w.iter().map(|v| v.abs()).sum::<f64>();

    let rate = positives as f64 / y.len() as f64;
    let b0 = if cfg.fit_intercept { libm::log(rate / (1.0 - rate)) } else { 0.0 };
    // Iterate on (w, b) packed as one vector with b last.
    let value = |v: &[f64]| obj.value(&v[..d], v[d]);
    let mut x_cur = vec![0.0; d + 1];
    x_cur[d] = b0;
    let mut f_cur = value(&x_cur) + penalty(&x_cur[..d]);
    let mut trace = FitTrace { objective: vec![f_cur], iterations: 0, converged: false };
    let max_step = 1.0 / obj.lipschitz(cfg.fit_intercept).max(f64::MIN_POSITIVE);
    let mut y_acc = x_cur.clone();
    let mut momentum = 1.0;

    for _ in 0..cfg.max_iters {
        let (gw, gb) = obj.gradient(&y_acc[..d], y_acc[d]);
        let f_y = value(&y_acc);
        let mut step = max_step;
        let accepted = loop {
            let mut z: Vec<f64> = (0..d)
                .map(|j| if dead[j] { 0.0 } else { soft_threshold(y_acc[j] - step * gw[j], step * cfg.l1) })
                .collect();
            z.push(if cfg.fit_intercept { y_acc[d] - step * gb } else { y_acc[d] });
            let f_z = value(&z);
            let mut lin = 0.0;
            let mut sq = 0.0;
            for (j, g) in gw.iter().chain(core::iter::once(&gb)).enumerate() {
                let dj = z[j] - y_acc[j];
                lin += dj * g;
                sq += dj * dj;
            }
            // A few ulps of slack absorb rounding once the objective is flat.
            if f_z <= f_y + lin + sq / (2.0 * step) + 4.0 * f64::EPSILON * f_y.abs() {
                break Some((z, f_z));
            }
            if step < 1e-20 {
                break None;
            }
            step *= 0.5;
        };
        let Some((z, f_z)) = accepted else { break };
        let mapping = z.iter().zip(&y_acc).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / step;
        let total_z = f_z + penalty(&z[..d]);
        let prev = f_cur;
        let next_momentum = (1.0 + libm::sqrt(1.0 + 4.0 * momentum * momentum)) / 2.0;
        // A plain step from a restart descends in exact arithmetic, so it may
        // exceed the current value by rounding noise. Without this the solver
        // stalls once the objective is flat to the last few ulps.
        let restarted = momentum == 1.0;
        let noise = 4.0 * f64::EPSILON * f_cur.abs();
        if total_z <= f_cur || (restarted && total_z <= f_cur + noise) {
            // Accelerated step from the accepted point.
            let beta = (momentum - 1.0) / next_momentum;
            y_acc = z.iter().zip(&x_cur).map(|(zn, xo)| zn + beta * (zn - xo)).collect();
            x_cur = z;
            f_cur = total_z;
            momentum = next_momentum;
        } else {
            // Keep the iterate, restart the momentum.
            y_acc = x_cur.clone();
            momentum = 1.0;
        }
        trace.objective.push(f_cur);
        trace.iterations += 1;
        let decrease = ((prev - f_cur) / prev.abs().max(1.0)).max(0.0);
        if decrease < cfg.tol && mapping < cfg.tol {
            trace.converged = true;
            break;
        }
    }
    let b = x_cur.pop().unwrap_or(0.0);
    let w = x_cur;
    let model = LinearModel {
        format_version: MODEL_FORMAT_VERSION,
        kind: LinearKind::Logistic,
        columns: x.columns().to_vec(),
        weights: w,
        intercept: b,
        standardization: std,
        config: cfg.clone(),
    };
    Ok((model, trace))
}

/// Solves `(Z'Z + l2 I) w = Z'(y - mean y)` on centered and scaled columns.
/// With `standardize` and `fit_intercept` both off the system is solved on the
/// raw matrix and the intercept is 0.
pub fn fit_ridge(x: &FeatureMatrix, y: &[f64], cfg: &TrainConfig) -> Result<LinearModel> {
    cfg.validate()?;
    if y.len() != x.n_rows() {
        return Err(Error::Length(format!("{} targets for {} rows", y.len(), x.n_rows())));
    }
    if x.n_rows() == 0 {
        return Err(Error::Cardinality("ridge regression needs at least 1 row".into()));
    }
    check_finite(x)?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Validation("non-finite regression target".into()));
    }
    let d = x.n_cols();
    let (std, dead) = Standardization::fit(x.rows(), d, cfg.fit_intercept, cfg.standardize);
    let live: Vec<usize> = (0..d).filter(|&j| !dead[j]).collect();
    let rows: Vec<Vec<f64>> = x.rows().iter().map(|r| std.transform_row(r)).collect();
    let y_mean = if cfg.fit_intercept { y.iter().sum::<f64>() / y.len() as f64 } else { 0.0 };

    let m = live.len();
    let mut a = Square::zeros(m);
    let mut rhs = vec![0.0; m];
    for (r, t) in rows.iter().zip(y) {
        let t = t - y_mean;
        for (p, &i) in live.iter().enumerate() {
            rhs[p] += r[i] * t;
            for (q, &j) in live.iter().enumerate().skip(p) {
                a.add(p, q, r[i] * r[j]);
            }
        }
    }
    for p in 0..m {
        a.add(p, p, cfg.l2);
        for q in 0..p {
            a.set(p, q, a.get(q, p));
        }
    }
    let solved = if m == 0 {
        Vec::new()
    } else {
        cholesky_solve(&a, &rhs).map_err(|e| match e {
            Error::Singular(msg) => Error::Singular(format!("{msg}; the design is rank deficient, use l2 > 0")),
            other => other,
        })?
    };
    let mut weights = vec![0.0; d];
    for (p, &j) in live.iter().enumerate() {
        weights[j] = solved[p];
    }
    Ok(LinearModel {
        format_version: MODEL_FORMAT_VERSION,
        kind: LinearKind::Ridge,
        columns: x.columns().to_vec(),
        weights,
        intercept: y_mean,
        standardization: std,
        config: cfg.clone(),
    })
}
