//! Confounding-additive-noise baseline in its simplified form: learn a latent
//! with Isomap, regress both observables on it, require both residuals to look
//! independent of the latent, and decide from the residual variance ratio.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::{self, BivariateDataset, CausalVerdict, VerdictTag};
use crate::error::{Error, Result};
use crate::kernel::{self, Bandwidth};
use crate::manifold::{self, EmbeddingConfig};
use crate::rng::RngSeed;
use crate::stats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CanConfig {
    pub embedding: EmbeddingConfig,
    pub ridge: f64,
    pub bandwidth: Bandwidth,
    /// A fit is accepted when both permutation p-values exceed this level.
    pub hsic_alpha: f64,
    pub n_permutations: usize,
    pub max_refits: usize,
    pub ratio_low: f64,
    pub ratio_high: f64,
    pub seed: RngSeed,
}

impl Default for CanConfig {
    fn default() -> Self {
        CanConfig {
            embedding: EmbeddingConfig::default(),
            ridge: 1e-3,
            bandwidth: Bandwidth::MedianHeuristic,
            hsic_alpha: 0.05,
            n_permutations: 200,
            max_refits: 5,
            ratio_low: 0.65,
            ratio_high: 1.65,
            seed: RngSeed(0),
        }
    }
}

impl CanConfig {
    pub fn validate(&self) -> Result<()> {
        self.embedding.validate()?;
        if !(self.ridge > 0.0) {
            return Err(Error::InvalidArgument(format!("ridge must be > 0, got {}", self.ridge)));
        }
        if !(self.hsic_alpha > 0.0 && self.hsic_alpha < 1.0) {
            return Err(Error::InvalidArgument(format!("hsic_alpha must be in (0, 1), got {}", self.hsic_alpha)));
        }
        if !(self.ratio_low < self.ratio_high) {
            return Err(Error::InvalidArgument("ratio_low must be below ratio_high".into()));
        }
        if self.max_refits == 0 || self.n_permutations == 0 {
            return Err(Error::InvalidArgument("max_refits and n_permutations must be positive".into()));
        }
        Ok(())
    }
}

/// Latent, residuals and independence statistics of one fit attempt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanFit {
    pub t: Vec<f64>,
    pub residual_a: Vec<f64>,
    pub residual_b: Vec<f64>,
    pub hsic_a: f64,
    pub hsic_b: f64,
    pub p_value_a: f64,
    pub p_value_b: f64,
    pub k_neighbors: usize,
    pub fitted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanOutcome {
    pub verdict: CausalVerdict,
    /// Accepted fit, or the last attempt when none was accepted.
    pub fit: CanFit,
    /// `var(u_A) / var(u_B)` of the accepted fit.
    pub ratio: Option<f64>,
    pub attempts: usize,
}

/// Kernel ridge regression (GP posterior mean) of `target` on `t`.
/// Returns `(predictions, residuals)`.
pub fn kernel_ridge_fit(t: &[f64], target: &[f64], ridge: f64, bandwidth: Bandwidth) -> Result<(Vec<f64>, Vec<f64>)> {
    if t.len() != target.len() {
        return Err(Error::LengthMismatch { a: t.len(), b: target.len() });
    }
    if t.len() < 3 {
        return Err(Error::TooFewSamples { needed: 3, got: t.len() });
    }
    let k = kernel::rbf_gram(t, bandwidth.resolve(t));
    let pred = kernel::ridge_smooth(&k, ridge, target)?;
    let resid = target.iter().zip(&pred).map(|(y, p)| y - p).collect();
    Ok((pred, resid))
}

fn centered(k: &DMatrix<f64>) -> DMatrix<f64> {
    let n = k.nrows();
    let row_means: Vec<f64> = (0..n).map(|i| k.row(i).mean()).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    DMatrix::from_fn(n, n, |i, j| k[(i, j)] - row_means[i] - row_means[j] + grand)
}

/// Biased HSIC, `trace(K_x H K_y H) / n^2`, with RBF kernels. Both Grams are
/// centered so a constant argument gives exactly zero.
pub fn hsic(x: &[f64], y: &[f64], bandwidth: Bandwidth) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { a: x.len(), b: y.len() });
    }
    let kx = kernel::rbf_gram(x, bandwidth.resolve(x));
    let ky = kernel::rbf_gram(y, bandwidth.resolve(y));
    Ok(hsic_from_grams(&centered(&kx), &centered(&ky), None))
}

/// `sum_ij Kxc[i,j] Kyc[p(i),p(j)] / n^2` for an optional permutation `p` of `y`.
fn hsic_from_grams(kxc: &DMatrix<f64>, kyc: &DMatrix<f64>, perm: Option<&[usize]>) -> f64 {
    let n = kxc.nrows();
    let mut s = 0.0;
    for j in 0..n {
        let pj = perm.map_or(j, |p| p[j]);
        for i in 0..n {
            let pi = perm.map_or(i, |p| p[i]);
            s += kxc[(i, j)] * kyc[(pi, pj)];
        }
    }
    s / (n * n) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HsicTest {
    pub statistic: f64,
    pub p_value: f64,
    /// 95th percentile of the permutation null.
    pub null_q95: f64,
}

/// HSIC permutation test of independence between `x` and `y`.
/// The p-value is `(1 + #{null >= observed}) / (1 + permutations)`.
pub fn hsic_permutation_test(
    x: &[f64],
    y: &[f64],
    bandwidth: Bandwidth,
    permutations: usize,
    seed: RngSeed,
) -> Result<HsicTest> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { a: x.len(), b: y.len() });
    }
    let n = x.len();
    let kxc = centered(&kernel::rbf_gram(x, bandwidth.resolve(x)));
    // centering commutes with a joint row/column permutation
    let kyc = centered(&kernel::rbf_gram(y, bandwidth.resolve(y)));
    let statistic = hsic_from_grams(&kxc, &kyc, None);
    let mut rng = seed.rng();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut null = Vec::with_capacity(permutations);
    for _ in 0..permutations {
        rng.shuffle(&mut perm);
        null.push(hsic_from_grams(&kxc, &kyc, Some(&perm)));
    }
    let exceed = null.iter().filter(|&&v| v >= statistic).count();
    null.sort_by(f64::total_cmp);
    let q = ((0.95 * permutations as f64).ceil() as usize).clamp(1, permutations) - 1;
    Ok(HsicTest {
        statistic,
        p_value: (1 + exceed) as f64 / (1 + permutations) as f64,
        null_q95: null[q],
    })
}

/// Map a residual variance ratio onto a verdict.
pub fn ratio_verdict(r: f64, low: f64, high: f64) -> VerdictTag {
    if r <= low {
        VerdictTag::AtoB
    } else if r >= high {
        VerdictTag::BtoA
    } else {
        VerdictTag::CommonCause
    }
}

/// Neighborhood sizes tried on successive attempts: `k, k+2, k-2, k+4, k-4, ...`,
/// kept within `[2, n - 1]`.
fn attempt_neighbors(k0: usize, n: usize, attempts: usize) -> Vec<usize> {
    let mut ks = Vec::with_capacity(attempts);
    let mut step = 0i64;
    while ks.len() < attempts {
        for off in if step == 0 { vec![0] } else { vec![2 * step, -2 * step] } {
            let k = (k0 as i64 + off).clamp(2, n as i64 - 1) as usize;
            if ks.len() < attempts {
                ks.push(k);
            }
        }
        step += 1;
    }
    ks
}

fn fit_once(d: &BivariateDataset, cfg: &CanConfig, k: usize, attempt: usize) -> Result<CanFit> {
    let emb_cfg = EmbeddingConfig { k_neighbors: Some(k), ..cfg.embedding };
    let emb = manifold::isomap_embed(d, &emb_cfg)?;
    let (a, b): (Vec<f64>, Vec<f64>) = emb.kept_indices.iter().map(|&i| (d.a()[i], d.b()[i])).unzip();
    let (_, ua) = kernel_ridge_fit(&emb.t, &a, cfg.ridge, cfg.bandwidth)?;
    let (_, ub) = kernel_ridge_fit(&emb.t, &b, cfg.ridge, cfg.bandwidth)?;
    let seed = cfg.seed.derive(attempt as u64);
    let ta = hsic_permutation_test(&ua, &emb.t, cfg.bandwidth, cfg.n_permutations, seed.derive(0))?;
    let tb = hsic_permutation_test(&ub, &emb.t, cfg.bandwidth, cfg.n_permutations, seed.derive(1))?;
    Ok(CanFit {
        fitted: ta.p_value > cfg.hsic_alpha && tb.p_value > cfg.hsic_alpha,
        t: emb.t,
        residual_a: ua,
        residual_b: ub,
        hsic_a: ta.statistic,
        hsic_b: tb.statistic,
        p_value_a: ta.p_value,
        p_value_b: tb.p_value,
        k_neighbors: emb.k_used,
    })
}

pub fn can_discover(d: &BivariateDataset, cfg: &CanConfig) -> Result<CanOutcome> {
    cfg.validate()?;
    let d = data::normalize_unit_variance(d)?;
    let n = d.len();
    let k0 = cfg.embedding.neighbors_for(n);
    let mut last = None;
    for (attempt, k) in attempt_neighbors(k0, n, cfg.max_refits).into_iter().enumerate() {
        let fit = fit_once(&d, cfg, k, attempt)?;
        if fit.fitted {
            let r = stats::variance(&fit.residual_a) / stats::variance(&fit.residual_b);
            let tag = ratio_verdict(r, cfg.ratio_low, cfg.ratio_high);
            return Ok(CanOutcome {
                verdict: CausalVerdict::with_detail(tag, format!("r={r:.4}, k={}", fit.k_neighbors)),
                fit,
                ratio: Some(r),
                attempts: attempt + 1,
            });
        }
        last = Some(fit);
    }
    Ok(CanOutcome {
        verdict: CausalVerdict::with_detail(VerdictTag::Undecided, "model-fit failure"),
        fit: last.expect("at least one attempt"),
        ratio: None,
        attempts: cfg.max_refits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_bands() {
        assert_eq!(ratio_verdict(1.0, 0.65, 1.65), VerdictTag::CommonCause);
        assert_eq!(ratio_verdict(0.65, 0.65, 1.65), VerdictTag::AtoB);
        assert_eq!(ratio_verdict(1.65, 0.65, 1.65), VerdictTag::BtoA);
    }

    #[test]
    fn attempt_schedule() {
        assert_eq!(attempt_neighbors(10, 250, 5), vec![10, 12, 8, 14, 6]);
        assert_eq!(attempt_neighbors(3, 6, 4), vec![3, 5, 2, 5]);
    }

    #[test]
    fn hsic_constant_zero() {
        let x: Vec<f64> = (0..20).map(|i| (i as f64).sin()).collect();
        let y = vec![2.5; 20];
        assert!(hsic(&x, &y, Bandwidth::MedianHeuristic).unwrap().abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(CanConfig::default().validate().is_ok());
        let c = CanConfig { ratio_low: 2.0, ..Default::default() };
        assert!(c.validate().is_err());
        let c = CanConfig { hsic_alpha: 1.0, ..Default::default() };
        assert!(c.validate().is_err());
    }
}
