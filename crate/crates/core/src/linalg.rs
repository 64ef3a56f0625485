//! Small dense linear algebra used by the polynomial fits and ridge solver.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Square {
    n: usize,
    data: Vec<f64>,
}

impl Square {
    pub fn zeros(n: usize) -> Self {
        Square { n, data: alloc::vec![0.0; n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.n + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.n + c] = v;
    }

    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.n + c] += v;
    }
}

/// Cholesky solve of a symmetric positive definite system.
pub fn cholesky_solve(a: &Square, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.dim();
    let mut l = Square::zeros(n);
    let scale = (0..n).map(|i| a.get(i, i).abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    for j in 0..n {
        let mut d = a.get(j, j);
        for k in 0..j {
            d -= l.get(j, k) * l.get(j, k);
        }
        if d <= scale * 1e-13 {
            return Err(Error::Singular(alloc::format!("matrix not positive definite at pivot {j}")));
        }
        let d = libm::sqrt(d);
        l.set(j, j, d);
        for i in (j + 1)..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            l.set(i, j, s / d);
        }
    }
    let mut y = alloc::vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l.get(i, k) * y[k];
        }
        y[i] = s / l.get(i, i);
    }
    let mut x = alloc::vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l.get(k, i) * x[k];
        }
        x[i] = s / l.get(i, i);
    }
    Ok(x)
}

/// Least-squares polynomial fit of `degree` over `(x, y)` pairs. Returns
/// coefficients from the constant term upwards.
pub fn polyfit(xs: &[f64], ys: &[f64], degree: usize) -> Result<Vec<f64>> {
    let m = degree + 1;
    if xs.len() < m {
        return Err(Error::Length(alloc::format!("{} points cannot fit degree {degree}", xs.len())));
    }
    // Center x for conditioning, then expand back.
    let mean_x = xs.iter().sum::<f64>() / xs.len() as f64;
    let mut ata = Square::zeros(m);
    let mut atb = alloc::vec![0.0; m];
    for (&x, &y) in xs.iter().zip(ys) {
        let u = x - mean_x;
        let mut powers = alloc::vec![1.0; m];
        for p in 1..m {
            powers[p] = powers[p - 1] * u;
        }
        for r in 0..m {
            atb[r] += powers[r] * y;
            for c in 0..m {
                ata.add(r, c, powers[r] * powers[c]);
            }
        }
    }
    let centered = cholesky_solve(&ata, &atb)?;
    // p(x) = sum_k c_k (x - mean)^k, expanded with binomial coefficients.
    let mut coefs = alloc::vec![0.0; m];
    for (k, &ck) in centered.iter().enumerate() {
        let mut binom = 1.0;
        for j in 0..=k {
            if j > 0 {
                binom = binom * (k - j + 1) as f64 / j as f64;
            }
            coefs[j] += ck * binom * libm::pow(-mean_x, (k - j) as f64);
        }
    }
    Ok(coefs)
}
