//! RBF Gram matrices, bandwidth selection and the regularized solves shared by
//! the kernel scorers and the CAN regressions.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    /// Median of the pairwise absolute differences of the kernel's input.
    MedianHeuristic,
    Fixed(f64),
}

impl Default for Bandwidth {
    fn default() -> Self {
        Bandwidth::MedianHeuristic
    }
}

impl Bandwidth {
    pub fn resolve(self, xs: &[f64]) -> f64 {
        match self {
            Bandwidth::Fixed(s) => s,
            Bandwidth::MedianHeuristic => median_heuristic(xs),
        }
    }
}

/// Median pairwise distance; falls back to 1 when that median is zero.
pub fn median_heuristic(xs: &[f64]) -> f64 {
    let n = xs.len();
    let mut d = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            d.push((xs[i] - xs[j]).abs());
        }
    }
    if d.is_empty() {
        return 1.0;
    }
    let m = stats::median(&mut d);
    if m > 0.0 && m.is_finite() {
        m
    } else {
        1.0
    }
}

/// `K[i, j] = exp(-(x_i - x_j)^2 / (2 sigma^2))`.
pub fn rbf_gram(xs: &[f64], sigma: f64) -> DMatrix<f64> {
    let n = xs.len();
    let scale = -0.5 / (sigma * sigma);
    let mut k = DMatrix::from_element(n, n, 1.0);
    for j in 0..n {
        for i in (j + 1)..n {
            let d = xs[i] - xs[j];
            let v = (scale * d * d).exp();
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

/// Residual diagonal at which [`rbf_factor`] stops adding columns.
pub const LOW_RANK_TOL: f64 = 1e-12;

/// Pivoted incomplete Cholesky of the RBF Gram: `G` (n x r) with
/// `K - G G^T` positive semidefinite and every diagonal entry below `tol`.
/// Pivots are the largest residual diagonal, lowest index on ties, so the
/// factor is deterministic. On 1-D inputs `r` is typically a few dozen.
pub fn rbf_factor(xs: &[f64], sigma: f64, tol: f64) -> DMatrix<f64> {
    let n = xs.len();
    let scale = -0.5 / (sigma * sigma);
    let mut diag = vec![1.0f64; n];
    let mut cols: Vec<Vec<f64>> = Vec::new();
    while cols.len() < n {
        let (j, &dj) = diag
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
            .expect("non-empty");
        if dj <= tol {
            break;
        }
        let piv = dj.sqrt();
        let mut c: Vec<f64> = xs.iter().map(|&x| (scale * (x - xs[j]) * (x - xs[j])).exp()).collect();
        for prev in &cols {
            let pj = prev[j];
            c.iter_mut().zip(prev).for_each(|(ci, pi)| *ci -= pi * pj);
        }
        c.iter_mut().for_each(|v| *v /= piv);
        for (d, v) in diag.iter_mut().zip(&c) {
            *d -= v * v;
        }
        diag[j] = 0.0;
        cols.push(c);
    }
    let r = cols.len();
    DMatrix::from_fn(n, r, |i, k| cols[k][i])
}

/// Cholesky factor of `K + n * ridge * I`.
pub fn regularized_factor(k: &DMatrix<f64>, ridge: f64) -> Result<Cholesky<f64, Dyn>> {
    let n = k.nrows();
    let mut m = k.clone();
    let shift = n as f64 * ridge;
    for i in 0..n {
        m[(i, i)] += shift;
    }
    Cholesky::new(m).ok_or_else(|| {
        Error::NumericalFailure(format!("K + n*ridge*I not positive definite (ridge={ridge:e})"))
    })
}

/// `K (K + n ridge I)^{-1} y`, the kernel ridge / GP posterior mean at the inputs.
pub fn ridge_smooth(k: &DMatrix<f64>, ridge: f64, y: &[f64]) -> Result<Vec<f64>> {
    let chol = regularized_factor(k, ridge)?;
    let alpha = chol.solve(&DVector::from_column_slice(y));
    Ok((k * alpha).iter().copied().collect())
}
