//! Directed bivariate scorers.
//!
//! A scorer maps paired samples `(x, y)` to two reals, one per causal
//! direction; the lower value marks the preferred direction. Two are provided:
//!
//! * IGCI, the slope-based information-geometric estimator: after mapping each
//!   variable to a reference scale, `C(x -> y)` is the average log slope
//!   `log |dy/dx|` between consecutive points sorted by `x`.
//! * KCDC, the variance across conditioning values of the RKHS norms of the
//!   conditional mean embeddings `mu_{Y | X = x_i}`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{self, Bandwidth};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectedScores {
    pub v_xy: f64,
    pub v_yx: f64,
}

impl DirectedScores {
    pub fn swapped(self) -> Self {
        DirectedScores { v_xy: self.v_yx, v_yx: self.v_xy }
    }

    /// `|v_xy - v_yx|`, the asymmetry of the link.
    pub fn gap(self) -> f64 {
        (self.v_xy - self.v_yx).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    XtoY,
    YtoX,
    Undetermined,
}

/// Undetermined when the two scores differ by less than `delta`, otherwise the
/// direction with the smaller score.
pub fn decide_direction(s: DirectedScores, delta: f64) -> Direction {
    if s.gap() < delta {
        Direction::Undetermined
    } else if s.v_xy < s.v_yx {
        Direction::XtoY
    } else {
        Direction::YtoX
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScorerKind {
    #[serde(alias = "igci")]
    IGCI,
    #[serde(alias = "kcdc")]
    KCDC,
}

/// Reference measure applied to each variable before the IGCI slope estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IgciReference {
    /// Affine map onto `[0, 1]`.
    #[default]
    UniformRescale,
    /// Shift and scale to mean 0, unit variance.
    GaussianStandardize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScorerConfig {
    pub scorer: ScorerKind,
    pub delta: f64,
    pub bandwidth: Bandwidth,
    pub ridge: f64,
    pub igci_reference: IgciReference,
}

impl Default for ScorerConfig {
    fn default() -> Self {
        ScorerConfig {
            scorer: ScorerKind::KCDC,
            delta: 1e-4,
            bandwidth: Bandwidth::MedianHeuristic,
            ridge: 1e-3,
            igci_reference: IgciReference::default(),
        }
    }
}

impl ScorerConfig {
    pub fn igci() -> Self {
        ScorerConfig { scorer: ScorerKind::IGCI, ..Default::default() }
    }

    pub fn kcdc() -> Self {
        ScorerConfig { scorer: ScorerKind::KCDC, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta >= 0.0) {
            return Err(Error::InvalidArgument(format!("delta must be >= 0, got {}", self.delta)));
        }
        if !(self.ridge > 0.0) {
            return Err(Error::InvalidArgument(format!("ridge must be > 0, got {}", self.ridge)));
        }
        if let Bandwidth::Fixed(s) = self.bandwidth {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::InvalidArgument(format!("bandwidth must be > 0, got {s}")));
            }
        }
        Ok(())
    }

    /// Dispatch to the configured scorer.
    pub fn score(&self, x: &[f64], y: &[f64]) -> Result<DirectedScores> {
        match self.scorer {
            ScorerKind::IGCI => igci_scores_with(x, y, self.igci_reference),
            ScorerKind::KCDC => kcdc_scores(x, y, self),
        }
    }
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { a: x.len(), b: y.len() });
    }
    if x.len() < 3 {
        return Err(Error::TooFewSamples { needed: 3, got: x.len() });
    }
    Ok(())
}

fn to_reference(v: &[f64], reference: IgciReference) -> Result<Vec<f64>> {
    match reference {
        IgciReference::UniformRescale => {
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let span = hi - lo;
            if !(span > 0.0) {
                return Err(Error::DegenerateData("fewer than 2 distinct values".into()));
            }
            Ok(v.iter().map(|x| (x - lo) / span).collect())
        }
        IgciReference::GaussianStandardize => stats::standardize(v)
            .ok_or_else(|| Error::DegenerateData("fewer than 2 distinct values".into())),
    }
}

/// Average log slope of `y` against `x` over points sorted by `x`.
///
/// Repeated `x` values keep the first point in sorted order. Steps with no
/// change in `y` contribute nothing but still count in the `m - 1` divisor.
fn slope_estimate(x: &[f64], y: &[f64]) -> Result<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&i, &j| x[i].total_cmp(&x[j]).then(i.cmp(&j)));
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(x.len());
    for i in order {
        match pts.last() {
            Some(&(px, _)) if px == x[i] => {}
            _ => pts.push((x[i], y[i])),
        }
    }
    if pts.len() < 2 {
        return Err(Error::DegenerateData(
            "fewer than 2 strictly increasing points after merging duplicates".into(),
        ));
    }
    let sum: f64 = pts
        .windows(2)
        .filter_map(|w| {
            let dy = w[1].1 - w[0].1;
            (dy != 0.0).then(|| (dy / (w[1].0 - w[0].0)).abs().ln())
        })
        .sum();
    Ok(sum / (pts.len() - 1) as f64)
}

/// IGCI with the uniform (rescale to `[0, 1]`) reference measure.
pub fn igci_scores(x: &[f64], y: &[f64]) -> Result<DirectedScores> {
    igci_scores_with(x, y, IgciReference::UniformRescale)
}

pub fn igci_scores_with(x: &[f64], y: &[f64], reference: IgciReference) -> Result<DirectedScores> {
    check_pair(x, y)?;
    let xs = to_reference(x, reference)?;
    let ys = to_reference(y, reference)?;
    Ok(DirectedScores {
        v_xy: slope_estimate(&xs, &ys)?,
        v_yx: slope_estimate(&ys, &xs)?,
    })
}

/// RKHS norms `||mu_{Y | X = x_i}||` for every sample `i`.
///
/// With `W = (K_X + n ridge I)^{-1}` and `k_i` the i-th column of `K_X`, the
/// squared norm is `k_i^T W K_Y W k_i`. Both Grams are replaced by pivoted
/// Cholesky factors `K_X ~ G G^T`, `K_Y ~ H H^T` (residual below
/// [`kernel::LOW_RANK_TOL`]), which turns `W K_X` into `G (G^T G + n ridge I)^{-1} G^T`
/// and the norm into `||H^T G (G^T G + n ridge I)^{-1} g_i||`.
///
/// Both kernels use one bandwidth, resolved on the conditioning variable `x`.
pub fn cme_norms(x: &[f64], y: &[f64], cfg: &ScorerConfig) -> Result<Vec<f64>> {
    check_pair(x, y)?;
    let sigma = cfg.bandwidth.resolve(x);
    let g = kernel::rbf_factor(x, sigma, kernel::LOW_RANK_TOL);
    let h = kernel::rbf_factor(y, sigma, kernel::LOW_RANK_TOL);
    cme_norms_from_factors(&g, &h, cfg.ridge)
}

fn cme_norms_from_factors(g: &DMatrix<f64>, h: &DMatrix<f64>, ridge: f64) -> Result<Vec<f64>> {
    let n = g.nrows();
    let mut a = g.tr_mul(g);
    let shift = n as f64 * ridge;
    for i in 0..a.nrows() {
        a[(i, i)] += shift;
    }
    let chol = nalgebra::Cholesky::new(a)
        .ok_or_else(|| Error::NumericalFailure(format!("G^T G + n*ridge*I not positive definite (ridge={ridge:e})")))?;
    let z = chol.solve(&g.transpose());
    let q = h.tr_mul(g) * z;
    let norms: Vec<f64> = q.column_iter().map(|c| c.norm()).collect();
    if norms.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure("non-finite embedding norm".into()));
    }
    Ok(norms)
}

/// Dense `O(n^3)` evaluation of the same norms from full Gram matrices.
pub fn cme_norms_from_grams(kx: &DMatrix<f64>, ky: &DMatrix<f64>, ridge: f64) -> Result<Vec<f64>> {
    let chol = kernel::regularized_factor(kx, ridge)?;
    let m = chol.solve(kx);
    let p = ky * &m;
    let norms: Vec<f64> = (0..m.ncols())
        .map(|i| m.column(i).dot(&p.column(i)).max(0.0).sqrt())
        .collect();
    if norms.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure("non-finite embedding norm".into()));
    }
    Ok(norms)
}

/// KCDC: variance of the conditional embedding norms in each direction.
pub fn kcdc_scores(x: &[f64], y: &[f64], cfg: &ScorerConfig) -> Result<DirectedScores> {
    Ok(DirectedScores {
        v_xy: stats::variance(&cme_norms(x, y, cfg)?),
        v_yx: stats::variance(&cme_norms(y, x, cfg)?),
    })
}
