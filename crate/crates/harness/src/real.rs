//! Running one algorithm on a user-supplied pair file.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use confound_core::data::{load_pair_file, PairFormat};
use confound_core::{RngSeed, VerdictTag};
use serde::{Deserialize, Serialize};

use crate::experiment::run_algorithm;
use crate::{Algorithm, RunConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealResult {
    pub dataset_id: String,
    pub source: PathBuf,
    pub algorithm: Algorithm,
    pub rows: usize,
    pub skipped_rows: usize,
    pub verdict: VerdictTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub var: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub deltas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    pub runtime_ms: f64,
}

pub fn run_real(
    path: impl AsRef<Path>,
    format: &PairFormat,
    algorithm: Algorithm,
    cfg: &RunConfig,
    seed: RngSeed,
) -> anyhow::Result<RealResult> {
    let path = path.as_ref();
    let loaded = load_pair_file(path, format).with_context(|| format!("loading {}", path.display()))?;
    let start = Instant::now();
    let out = run_algorithm(algorithm, &loaded.data, cfg, seed)
        .with_context(|| format!("{algorithm} on {}", path.display()))?;
    let verdict = out.verdict.expect("every algorithm yields a verdict");
    Ok(RealResult {
        dataset_id: path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
        source: path.to_path_buf(),
        algorithm,
        rows: loaded.data.len(),
        skipped_rows: loaded.skipped,
        verdict: verdict.tag,
        detail: verdict.detail,
        mean: out.mean,
        var: out.var,
        deltas: out.deltas,
        ratio: out.ratio,
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}
