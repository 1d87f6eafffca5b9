//! Accuracy sweeps over synthetic datasets.

use std::io::Write;
use std::time::Instant;

use anyhow::{bail, Context};
use confound_core::can::can_discover;
use confound_core::data::normalize_unit_variance;
use confound_core::detector::discover;
use confound_core::scorers::{decide_direction, Direction, ScorerKind};
use confound_core::synth::{generate, Family, GeneratorSpec, LabeledDataset, NoiseKind};
use confound_core::{BivariateDataset, CausalVerdict, RngSeed, VerdictTag};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::report::{AlgorithmSummary, DatasetRecord, ExperimentReport};
use crate::{Algorithm, RunConfig};

/// Salt for the per-dataset algorithm seed; the generator uses the dataset seed itself.
const ALGORITHM_SALT: u64 = 0xa160;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub family: Family,
    pub noise: NoiseKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub n_datasets: usize,
    pub n_samples: usize,
    pub seed: RngSeed,
    pub algorithms: Vec<Algorithm>,
    /// Feed `(B, A)` instead of `(A, B)`; the ground truth is mirrored.
    #[serde(default)]
    pub swap_columns: bool,
    /// Worker threads; 0 uses the rayon default.
    #[serde(default)]
    pub threads: usize,
}

impl ExperimentPlan {
    pub fn new(family: Family, noise: NoiseKind, n_datasets: usize, n_samples: usize, seed: RngSeed) -> Self {
        ExperimentPlan {
            family,
            noise,
            lambda: None,
            n_datasets,
            n_samples,
            seed,
            algorithms: vec![Algorithm::ModKCDC, Algorithm::ModIGCI],
            swap_columns: false,
            threads: 0,
        }
    }

    pub fn with_algorithms(mut self, algorithms: &[Algorithm]) -> Self {
        self.algorithms = algorithms.to_vec();
        self
    }

    pub fn dataset_seed(&self, index: usize) -> RngSeed {
        self.seed.derive(index as u64)
    }

    pub fn generator_spec(&self, index: usize) -> GeneratorSpec {
        GeneratorSpec {
            lambda: self.lambda,
            ..GeneratorSpec::new(self.family, self.noise, self.n_samples, self.dataset_seed(index))
        }
    }

    pub fn dataset(&self, index: usize) -> confound_core::Result<LabeledDataset> {
        let d = generate(&self.generator_spec(index))?;
        Ok(if self.swap_columns { d.swapped() } else { d })
    }

    fn dataset_id(&self, index: usize) -> String {
        let mut id = format!("{:?}/{}/{}", self.family, self.noise.short_name(), index);
        if let Some(l) = self.lambda {
            id.push_str(&format!("/lambda={l}"));
        }
        if self.swap_columns {
            id.push_str("/swapped");
        }
        id
    }
}

/// Outcome of one algorithm on one dataset, before bookkeeping.
#[derive(Debug, Clone, Default)]
pub struct AlgorithmOutcome {
    pub verdict: Option<CausalVerdict>,
    pub mean: Option<f64>,
    pub var: Option<f64>,
    pub deltas: Vec<f64>,
    pub ratio: Option<f64>,
    pub fit_failed: bool,
}

/// Run a single algorithm on one dataset.
pub fn run_algorithm(
    algorithm: Algorithm,
    d: &BivariateDataset,
    cfg: &RunConfig,
    seed: RngSeed,
) -> confound_core::Result<AlgorithmOutcome> {
    match algorithm {
        Algorithm::ModKCDC | Algorithm::ModIGCI => {
            let dc = cfg.detector(algorithm, seed).expect("modified scorer");
            let r = discover(d, &dc)?;
            Ok(AlgorithmOutcome {
                verdict: Some(r.verdict),
                mean: Some(r.stats.mean),
                var: Some(r.stats.var),
                deltas: r.stats.deltas,
                ..Default::default()
            })
        }
        Algorithm::KCDC | Algorithm::IGCI => {
            let kind = if algorithm == Algorithm::KCDC { ScorerKind::KCDC } else { ScorerKind::IGCI };
            let sc = cfg.scorer(kind);
            let n = normalize_unit_variance(d)?;
            let s = sc.score(n.a(), n.b())?;
            let verdict = match decide_direction(s, sc.delta) {
                Direction::XtoY => CausalVerdict::new(VerdictTag::AtoB),
                Direction::YtoX => CausalVerdict::new(VerdictTag::BtoA),
                Direction::Undetermined => CausalVerdict::with_detail(
                    VerdictTag::Undecided,
                    format!("score gap {:.3e} within delta {}", s.gap(), sc.delta),
                ),
            };
            Ok(AlgorithmOutcome { verdict: Some(verdict), ..Default::default() })
        }
        Algorithm::CAN => {
            let r = can_discover(d, &cfg.can(seed))?;
            let fit_failed = !r.fit.fitted;
            Ok(AlgorithmOutcome { verdict: Some(r.verdict), ratio: r.ratio, fit_failed, ..Default::default() })
        }
    }
}

fn record(
    plan: &ExperimentPlan,
    index: usize,
    truth: VerdictTag,
    algorithm: Algorithm,
    result: Result<AlgorithmOutcome, String>,
    runtime_ms: f64,
) -> DatasetRecord {
    let (out, error) = match result {
        Ok(o) => (o, None),
        Err(e) => {
            // CAN failing anywhere in its pipeline is a fit failure
            let o = AlgorithmOutcome { fit_failed: algorithm.excludes_failures(), ..Default::default() };
            (o, Some(e))
        }
    };
    let (verdict, detail) = match out.verdict {
        Some(v) => (v.tag, v.detail),
        None => (VerdictTag::Undecided, None),
    };
    DatasetRecord {
        dataset_id: plan.dataset_id(index),
        index,
        seed: plan.dataset_seed(index),
        truth,
        verdict,
        detail,
        correct: !out.fit_failed && verdict == truth,
        mean: out.mean,
        var: out.var,
        deltas: out.deltas,
        ratio: out.ratio,
        fit_failed: out.fit_failed,
        error,
        runtime_ms,
    }
}

fn run_dataset(plan: &ExperimentPlan, cfg: &RunConfig, index: usize) -> Vec<DatasetRecord> {
    let labeled = match plan.dataset(index) {
        Ok(d) => d,
        Err(e) => {
            let truth = if plan.swap_columns { plan.family.truth().mirrored() } else { plan.family.truth() };
            let msg = format!("generation failed: {e}");
            return plan.algorithms.iter().map(|&a| record(plan, index, truth, a, Err(msg.clone()), 0.0)).collect();
        }
    };
    let seed = plan.dataset_seed(index).derive(ALGORITHM_SALT);
    plan.algorithms
        .iter()
        .map(|&a| {
            let start = Instant::now();
            let r = run_algorithm(a, &labeled.data, cfg, seed).map_err(|e| e.to_string());
            let ms = start.elapsed().as_secs_f64() * 1e3;
            record(plan, index, labeled.truth.tag, a, r, ms)
        })
        .collect()
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> anyhow::Result<T> {
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .context("building worker pool")?;
    Ok(pool.install(f))
}

/// Generate `n_datasets` datasets and run every planned algorithm on each.
/// Records come back in dataset order regardless of scheduling.
pub fn run_accuracy(plan: &ExperimentPlan, cfg: &RunConfig) -> anyhow::Result<ExperimentReport> {
    if plan.n_datasets == 0 {
        bail!("n_datasets must be positive");
    }
    if plan.algorithms.is_empty() {
        bail!("no algorithms selected");
    }
    plan.generator_spec(0).validate().context("invalid generator settings")?;
    let rows: Vec<Vec<DatasetRecord>> =
        in_pool(plan.threads, || (0..plan.n_datasets).into_par_iter().map(|i| run_dataset(plan, cfg, i)).collect())?;
    let summaries = plan
        .algorithms
        .iter()
        .enumerate()
        .map(|(k, &a)| AlgorithmSummary::from_records(a, rows.iter().map(|r| r[k].clone()).collect()))
        .collect();
    Ok(ExperimentReport { plan: plan.clone(), summaries })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityPoint {
    pub lambda: f64,
    pub algorithm: Algorithm,
    pub directed_accuracy: Option<f64>,
    pub common_accuracy: Option<f64>,
}

/// Accuracy on both sensitivity families for each noise strength.
pub fn run_sensitivity(
    lambdas: &[f64],
    algorithms: &[Algorithm],
    n_datasets: usize,
    n_samples: usize,
    seed: RngSeed,
    cfg: &RunConfig,
) -> anyhow::Result<Vec<SensitivityPoint>> {
    let mut out = Vec::new();
    for (li, &lambda) in lambdas.iter().enumerate() {
        let mut reports = Vec::new();
        for (fi, family) in [Family::SensitivityDirected, Family::SensitivityCommon].into_iter().enumerate() {
            let mut plan = ExperimentPlan::new(
                family,
                NoiseKind::Normal01,
                n_datasets,
                n_samples,
                seed.derive(li as u64).derive(fi as u64),
            )
            .with_algorithms(algorithms);
            plan.lambda = Some(lambda);
            reports.push(run_accuracy(&plan, cfg)?);
        }
        for &a in algorithms {
            out.push(SensitivityPoint {
                lambda,
                algorithm: a,
                directed_accuracy: reports[0].accuracy(a),
                common_accuracy: reports[1].accuracy(a),
            });
        }
    }
    Ok(out)
}

pub fn write_sensitivity_csv(points: &[SensitivityPoint], mut w: impl Write) -> std::io::Result<()> {
    let fmt = |x: Option<f64>| x.map(|v| format!("{v:.4}")).unwrap_or_default();
    writeln!(w, "lambda,algorithm,directed_accuracy,common_accuracy")?;
    for p in points {
        writeln!(w, "{},{},{},{}", p.lambda, p.algorithm, fmt(p.directed_accuracy), fmt(p.common_accuracy))?;
    }
    Ok(())
}

/// Accepts a variant name (`DirectedAdditive1`) or a short code: `d1`..`d6`,
/// `c1`..`c6`, `r1`..`r4` (robustness), `sd`/`sc` (sensitivity).
pub fn parse_family(s: &str) -> anyhow::Result<Family> {
    let all = Family::DIRECTED
        .iter()
        .chain(&Family::COMMON)
        .chain(&Family::ROBUSTNESS)
        .chain(&[Family::SensitivityDirected, Family::SensitivityCommon]);
    if let Some(f) = all.clone().find(|f| format!("{f:?}").eq_ignore_ascii_case(s)) {
        return Ok(*f);
    }
    let lower = s.to_ascii_lowercase();
    let pick = |list: &[Family], rest: &str| -> Option<Family> {
        let i: usize = rest.parse().ok()?;
        list.get(i.checked_sub(1)?).copied()
    };
    let found = match lower.split_at(lower.len().min(1)) {
        _ if lower == "sd" => Some(Family::SensitivityDirected),
        _ if lower == "sc" => Some(Family::SensitivityCommon),
        ("d", rest) => pick(&Family::DIRECTED, rest),
        ("c", rest) => pick(&Family::COMMON, rest),
        ("r", rest) => pick(&Family::ROBUSTNESS, rest),
        _ => None,
    };
    found.with_context(|| format!("unknown dataset family `{s}`"))
}

pub fn parse_noise(s: &str) -> anyhow::Result<NoiseKind> {
    match s.to_ascii_lowercase().as_str() {
        "normal" | "n" | "normal01" | "gaussian" => Ok(NoiseKind::Normal01),
        "uniform" | "u" | "uniform01" => Ok(NoiseKind::Uniform01),
        "exponential" | "e" | "exp" | "exponential1" => Ok(NoiseKind::Exponential1),
        _ => bail!("unknown noise `{s}` (expected normal, uniform or exponential)"),
    }
}
