//! Seeded generators for the synthetic directed, common-cause, complex-noise,
//! Gaussian-process and sensitivity models.
//!
//! Rows are generated one at a time from the stream of `spec.seed`: the cause
//! (`A` for directed families, `T` for common-cause ones) is drawn first, then
//! `n_A` (common-cause families only), then `n_B`. A row whose formula yields a
//! non-finite value is discarded and redrawn; the count is reported in
//! [`LabeledDataset::rejected`]. Gaussian-process families draw all of `T`
//! first, then the function draws from `seed.derive(1)` and `seed.derive(2)`,
//! then the noises row by row.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::data::{BivariateDataset, CausalVerdict, VerdictTag};
use crate::error::{Error, Result};
use crate::rng::{PortableRng, RngSeed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum NoiseKind {
    #[default]
    Normal01,
    Uniform01,
    Exponential1,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 3] = [NoiseKind::Normal01, NoiseKind::Uniform01, NoiseKind::Exponential1];

    pub fn draw(self, rng: &mut PortableRng) -> f64 {
        match self {
            NoiseKind::Normal01 => rng.normal(),
            NoiseKind::Uniform01 => rng.uniform(),
            NoiseKind::Exponential1 => rng.exponential(),
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            NoiseKind::Normal01 => "normal",
            NoiseKind::Uniform01 => "uniform",
            NoiseKind::Exponential1 => "exponential",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// `B = sin(10A) + e^{3A} + n_B`
    DirectedAdditive1,
    /// `B = A e^{A^2} + n_B`
    DirectedAdditive2,
    /// `B = (sin(10A) + e^{3A}) e^{n_B}`
    DirectedMult3,
    /// `B = (A^2 + A^5) e^{n_B}`
    DirectedMult4,
    /// `B = A^5 - sin(A^2 |n_B|)`
    DirectedComplex5,
    /// `B = log(A + 10) + A^{8 n_B}`
    DirectedComplex6,
    /// `A = sin(10T) + e^{3T} + n_A`, `B = log(T + 10) + T^6 + n_B`
    CommonAdd1,
    /// `A = log(T + 10) + T^6 + n_A`, `B = T^2 + T^6 + n_B`
    CommonAdd2,
    /// `A = (sin(10T) + e^{3T}) e^{n_A}`, `B = (T^2 + T^6) e^{n_B}`
    CommonMult3,
    /// `A = (sin(10T) + e^{3T}) e^{n_A}`, `B = (log(T + 10) + T^6) e^{n_B}`
    CommonMult4,
    /// `A = log(T + 10) + T^6 + n_A`, `B = (T^2 + T^6) e^{n_B}`
    CommonMixed5,
    /// `A = sin(10T) + e^{3T} + n_A`, `B = (T^2 + T^6) e^{n_B}`
    CommonMixed6,
    /// `A = T^5 - sin(T^2 n_A)`, `B = log(T^4 + 10)^{2 n_B}`
    CommonComplex1,
    /// `A = T sin(10 T |n_A|)`, `B = log(T + 10) + T^{2 |n_B|}`
    CommonComplex2,
    /// `A = f(T) e^{n_A}`, `B = g(T) e^{n_B}`, `f, g ~ GP(poly even + periodic)`
    CommonGP3,
    /// as `CommonGP3` with `f ~ GP(poly even)`, `g ~ GP(poly odd + periodic)`
    CommonGP4,
    /// `B = sin(10A) + e^{3A} + lambda e^{e^{n_B}}`
    SensitivityDirected,
    /// `A = sin(3T) + lambda e^{e^{n_A}}`, `B = log(T + 10) + lambda e^{e^{n_B}}`
    SensitivityCommon,
}

impl Family {
    pub const DIRECTED: [Family; 6] = [
        Family::DirectedAdditive1,
        Family::DirectedAdditive2,
        Family::DirectedMult3,
        Family::DirectedMult4,
        Family::DirectedComplex5,
        Family::DirectedComplex6,
    ];
    pub const COMMON: [Family; 6] = [
        Family::CommonAdd1,
        Family::CommonAdd2,
        Family::CommonMult3,
        Family::CommonMult4,
        Family::CommonMixed5,
        Family::CommonMixed6,
    ];
    pub const ROBUSTNESS: [Family; 4] =
        [Family::CommonComplex1, Family::CommonComplex2, Family::CommonGP3, Family::CommonGP4];

    pub fn is_directed(self) -> bool {
        matches!(
            self,
            Family::DirectedAdditive1
                | Family::DirectedAdditive2
                | Family::DirectedMult3
                | Family::DirectedMult4
                | Family::DirectedComplex5
                | Family::DirectedComplex6
                | Family::SensitivityDirected
        )
    }

    pub fn is_sensitivity(self) -> bool {
        matches!(self, Family::SensitivityDirected | Family::SensitivityCommon)
    }

    pub fn truth(self) -> VerdictTag {
        if self.is_directed() {
            VerdictTag::AtoB
        } else {
            VerdictTag::CommonCause
        }
    }
}

/// Periodic-exponential kernel parameters for the GP families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodicParams {
    pub period: f64,
    pub lengthscale: f64,
}

impl Default for PeriodicParams {
    fn default() -> Self {
        PeriodicParams { period: 1.0, lengthscale: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub family: Family,
    #[serde(default)]
    pub noise: NoiseKind,
    pub n: usize,
    /// Noise scale; required for the sensitivity families and rejected otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub seed: RngSeed,
    #[serde(default)]
    pub periodic: PeriodicParams,
}

impl GeneratorSpec {
    pub fn new(family: Family, noise: NoiseKind, n: usize, seed: RngSeed) -> Self {
        GeneratorSpec { family, noise, n, lambda: None, seed, periodic: PeriodicParams::default() }
    }

    pub fn sensitivity(family: Family, lambda: f64, n: usize, seed: RngSeed) -> Self {
        GeneratorSpec { lambda: Some(lambda), ..Self::new(family, NoiseKind::Normal01, n, seed) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::TooFewSamples { needed: 3, got: self.n });
        }
        match (self.family.is_sensitivity(), self.lambda) {
            (true, None) => Err(Error::InvalidArgument(format!("{:?} needs lambda", self.family))),
            (true, Some(l)) if !(l >= 0.0) => Err(Error::InvalidArgument(format!("lambda must be >= 0, got {l}"))),
            (false, Some(_)) => Err(Error::InvalidArgument(format!("{:?} takes no lambda", self.family))),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub data: BivariateDataset,
    pub truth: CausalVerdict,
    /// Latent common cause, for common-cause families.
    pub latent_t: Option<Vec<f64>>,
    /// Noise entering `A` (common-cause families).
    pub noise_a: Option<Vec<f64>>,
    pub noise_b: Vec<f64>,
    /// Rows redrawn because a formula produced a non-finite value.
    pub rejected: usize,
}

impl LabeledDataset {
    /// Exchange A and B, mirroring the ground truth.
    pub fn swapped(&self) -> Self {
        LabeledDataset {
            data: self.data.swapped(),
            truth: CausalVerdict::new(self.truth.tag.mirrored()),
            latent_t: self.latent_t.clone(),
            noise_a: Some(self.noise_b.clone()),
            noise_b: self.noise_a.clone().unwrap_or_default(),
            rejected: self.rejected,
        }
    }
}

fn f_sin_exp(x: f64, freq: f64) -> f64 {
    (freq * x).sin() + (3.0 * x).exp()
}

fn f_log_t6(t: f64) -> f64 {
    (t + 10.0).ln() + t.powi(6)
}

fn f_t2_t6(t: f64) -> f64 {
    t * t + t.powi(6)
}

fn dbl_exp(n: f64) -> f64 {
    n.exp().exp()
}

/// `lambda * e^{e^n}`, exactly zero when `lambda` is zero.
fn scaled_dbl_exp(lambda: f64, n: f64) -> f64 {
    if lambda == 0.0 {
        0.0
    } else {
        lambda * dbl_exp(n)
    }
}

/// Effect given its cause and noise, for the directed families.
fn directed_effect(family: Family, a: f64, nb: f64, lambda: f64) -> f64 {
    match family {
        Family::DirectedAdditive1 => f_sin_exp(a, 10.0) + nb,
        Family::DirectedAdditive2 => a * (a * a).exp() + nb,
        Family::DirectedMult3 => f_sin_exp(a, 10.0) * nb.exp(),
        Family::DirectedMult4 => (a * a + a.powi(5)) * nb.exp(),
        Family::DirectedComplex5 => a.powi(5) - (a * a * nb.abs()).sin(),
        Family::DirectedComplex6 => (a + 10.0).ln() + a.powf(8.0 * nb),
        Family::SensitivityDirected => f_sin_exp(a, 10.0) + scaled_dbl_exp(lambda, nb),
        _ => unreachable!("not a directed family"),
    }
}

/// `(A, B)` given the latent and both noises, for the closed-form common-cause families.
fn common_effects(family: Family, t: f64, na: f64, nb: f64, lambda: f64) -> (f64, f64) {
    match family {
        Family::CommonAdd1 => (f_sin_exp(t, 10.0) + na, f_log_t6(t) + nb),
        Family::CommonAdd2 => (f_log_t6(t) + na, f_t2_t6(t) + nb),
        Family::CommonMult3 => (f_sin_exp(t, 10.0) * na.exp(), f_t2_t6(t) * nb.exp()),
        Family::CommonMult4 => (f_sin_exp(t, 10.0) * na.exp(), f_log_t6(t) * nb.exp()),
        Family::CommonMixed5 => (f_log_t6(t) + na, f_t2_t6(t) * nb.exp()),
        Family::CommonMixed6 => (f_sin_exp(t, 10.0) + na, f_t2_t6(t) * nb.exp()),
        Family::CommonComplex1 => (
            t.powi(5) - (t * t * na).sin(),
            (t.powi(4) + 10.0).ln().powf(2.0 * nb),
        ),
        Family::CommonComplex2 => (
            t * (10.0 * t * na.abs()).sin(),
            (t + 10.0).ln() + t.powf(2.0 * nb.abs()),
        ),
        Family::SensitivityCommon => (
            (3.0 * t).sin() + scaled_dbl_exp(lambda, na),
            (t + 10.0).ln() + scaled_dbl_exp(lambda, nb),
        ),
        _ => unreachable!("not a closed-form common-cause family"),
    }
}

const MAX_REJECTIONS_PER_ROW: usize = 10_000;

pub fn generate(spec: &GeneratorSpec) -> Result<LabeledDataset> {
    spec.validate()?;
    match spec.family {
        Family::CommonGP3 | Family::CommonGP4 => generate_gp(spec),
        f if f.is_directed() => generate_directed(spec),
        _ => generate_common(spec),
    }
}

fn generate_directed(spec: &GeneratorSpec) -> Result<LabeledDataset> {
    let lambda = spec.lambda.unwrap_or(0.0);
    let mut rng = spec.seed.rng();
    let (mut a, mut b, mut nbs) = (Vec::with_capacity(spec.n), Vec::with_capacity(spec.n), Vec::with_capacity(spec.n));
    let mut rejected = 0;
    for row in 0..spec.n {
        let mut tries = 0;
        loop {
            let x = rng.normal();
            let nb = spec.noise.draw(&mut rng);
            let y = directed_effect(spec.family, x, nb, lambda);
            if x.is_finite() && y.is_finite() {
                a.push(x);
                b.push(y);
                nbs.push(nb);
                break;
            }
            rejected += 1;
            tries += 1;
            if tries > MAX_REJECTIONS_PER_ROW {
                return Err(Error::NonFinite(row));
            }
        }
    }
    Ok(LabeledDataset {
        data: BivariateDataset::new(a, b)?,
        truth: CausalVerdict::new(VerdictTag::AtoB),
        latent_t: None,
        noise_a: None,
        noise_b: nbs,
        rejected,
    })
}

fn generate_common(spec: &GeneratorSpec) -> Result<LabeledDataset> {
    let lambda = spec.lambda.unwrap_or(0.0);
    let mut rng = spec.seed.rng();
    let n = spec.n;
    let (mut a, mut b, mut ts, mut nas, mut nbs) =
        (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    let mut rejected = 0;
    for row in 0..n {
        let mut tries = 0;
        loop {
            let t = rng.normal();
            let na = spec.noise.draw(&mut rng);
            let nb = spec.noise.draw(&mut rng);
            let (x, y) = common_effects(spec.family, t, na, nb, lambda);
            if x.is_finite() && y.is_finite() {
                a.push(x);
                b.push(y);
                ts.push(t);
                nas.push(na);
                nbs.push(nb);
                break;
            }
            rejected += 1;
            tries += 1;
            if tries > MAX_REJECTIONS_PER_ROW {
                return Err(Error::NonFinite(row));
            }
        }
    }
    Ok(LabeledDataset {
        data: BivariateDataset::new(a, b)?,
        truth: CausalVerdict::new(VerdictTag::CommonCause),
        latent_t: Some(ts),
        noise_a: Some(nas),
        noise_b: nbs,
        rejected,
    })
}

fn generate_gp(spec: &GeneratorSpec) -> Result<LabeledDataset> {
    let mut rng = spec.seed.rng();
    let n = spec.n;
    let t: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
    let (kf, kg) = match spec.family {
        Family::CommonGP3 => (GpKernel::PolyEvenPlusPeriodic, GpKernel::PolyEvenPlusPeriodic),
        _ => (GpKernel::PolyEven, GpKernel::PolyOddPlusPeriodic),
    };
    let f = gp_sample(&t, kf, spec.periodic, spec.seed.derive(1))?;
    let g = gp_sample(&t, kg, spec.periodic, spec.seed.derive(2))?;
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    let mut nas = Vec::with_capacity(n);
    let mut nbs = Vec::with_capacity(n);
    let mut rejected = 0;
    for row in 0..n {
        let mut tries = 0;
        loop {
            let na = spec.noise.draw(&mut rng);
            let nb = spec.noise.draw(&mut rng);
            let (x, y) = (f[row] * na.exp(), g[row] * nb.exp());
            if x.is_finite() && y.is_finite() {
                a.push(x);
                b.push(y);
                nas.push(na);
                nbs.push(nb);
                break;
            }
            rejected += 1;
            tries += 1;
            if tries > MAX_REJECTIONS_PER_ROW {
                return Err(Error::NonFinite(row));
            }
        }
    }
    Ok(LabeledDataset {
        data: BivariateDataset::new(a, b)?,
        truth: CausalVerdict::new(VerdictTag::CommonCause),
        latent_t: Some(t),
        noise_a: Some(nas),
        noise_b: nbs,
        rejected,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GpKernel {
    /// `s^2 t^2 + s^6 t^6`
    PolyEven,
    /// `s^3 t^3 + s^5 t^5`
    PolyOdd,
    PolyEvenPlusPeriodic,
    PolyOddPlusPeriodic,
}

impl GpKernel {
    pub fn eval(self, s: f64, t: f64, p: PeriodicParams) -> f64 {
        let st = s * t;
        let periodic = || {
            let sin = (std::f64::consts::PI * (s - t).abs() / p.period).sin();
            (-2.0 * sin * sin / (p.lengthscale * p.lengthscale)).exp()
        };
        match self {
            GpKernel::PolyEven => st.powi(2) + st.powi(6),
            GpKernel::PolyOdd => st.powi(3) + st.powi(5),
            GpKernel::PolyEvenPlusPeriodic => st.powi(2) + st.powi(6) + periodic(),
            GpKernel::PolyOddPlusPeriodic => st.powi(3) + st.powi(5) + periodic(),
        }
    }

    pub fn gram(self, t: &[f64], p: PeriodicParams) -> DMatrix<f64> {
        let n = t.len();
        DMatrix::from_fn(n, n, |i, j| self.eval(t[i], t[j], p))
    }
}

const GP_JITTER: f64 = 1e-8;

/// One zero-mean draw from the GP at the points `t`.
///
/// The covariance is the kernel Gram matrix plus `1e-8` on the diagonal. It is
/// factorized by symmetric eigendecomposition (negative round-off eigenvalues
/// clipped to zero) because the polynomial kernels are low rank.
pub fn gp_sample(t: &[f64], kernel: GpKernel, periodic: PeriodicParams, seed: RngSeed) -> Result<Vec<f64>> {
    let n = t.len();
    if n < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: n });
    }
    let mut k = kernel.gram(t, periodic);
    for i in 0..n {
        k[(i, i)] += GP_JITTER;
    }
    let eig = SymmetricEigen::new(k);
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::FactorizationFailure("non-finite eigenvalues in GP covariance".into()));
    }
    let mut rng = seed.rng();
    let z = DVector::from_iterator(n, (0..n).map(|_| rng.normal()));
    let scaled = DVector::from_iterator(n, eig.eigenvalues.iter().zip(z.iter()).map(|(l, z)| l.max(0.0).sqrt() * z));
    let draw = &eig.eigenvectors * scaled;
    if draw.iter().any(|v| !v.is_finite()) {
        return Err(Error::FactorizationFailure("non-finite GP draw".into()));
    }
    Ok(draw.iter().copied().collect())
}
