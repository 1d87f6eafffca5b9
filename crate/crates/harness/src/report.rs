//! Per-dataset records and per-algorithm summaries written as JSON.

use confound_core::{RngSeed, VerdictTag};
use serde::{Deserialize, Serialize};

use crate::experiment::ExperimentPlan;
use crate::Algorithm;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub dataset_id: String,
    pub index: usize,
    pub seed: RngSeed,
    pub truth: VerdictTag,
    pub verdict: VerdictTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    pub correct: bool,
    /// Bootstrap delta summary (modified scorers only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub var: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub deltas: Vec<f64>,
    /// Residual variance ratio var(u_A)/var(u_B) (CAN only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    /// CAN found no embedding with independent residuals.
    pub fit_failed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub runtime_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    pub algorithm: Algorithm,
    pub n_datasets: usize,
    pub correct: usize,
    /// Datasets in the accuracy denominator.
    pub evaluated: usize,
    pub fit_failures: usize,
    pub undecided: usize,
    pub errors: usize,
    /// `None` when nothing was evaluated.
    pub accuracy: Option<f64>,
    pub records: Vec<DatasetRecord>,
}

impl AlgorithmSummary {
    /// Undecided counts against the modified and plain scorers; CAN
    /// fit failures are left out of the denominator instead.
    pub fn from_records(algorithm: Algorithm, records: Vec<DatasetRecord>) -> Self {
        let n = records.len();
        let correct = records.iter().filter(|r| r.correct).count();
        let fit_failures = records.iter().filter(|r| r.fit_failed).count();
        let undecided = records.iter().filter(|r| r.verdict == VerdictTag::Undecided).count();
        let errors = records.iter().filter(|r| r.error.is_some()).count();
        let evaluated = if algorithm.excludes_failures() { n - fit_failures } else { n };
        let accuracy = (evaluated > 0).then(|| correct as f64 / evaluated as f64);
        AlgorithmSummary { algorithm, n_datasets: n, correct, evaluated, fit_failures, undecided, errors, accuracy, records }
    }

    pub fn fit_failure_rate(&self) -> f64 {
        if self.n_datasets == 0 {
            0.0
        } else {
            self.fit_failures as f64 / self.n_datasets as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub plan: ExperimentPlan,
    pub summaries: Vec<AlgorithmSummary>,
}

impl ExperimentReport {
    pub fn summary(&self, algorithm: Algorithm) -> Option<&AlgorithmSummary> {
        self.summaries.iter().find(|s| s.algorithm == algorithm)
    }

    pub fn accuracy(&self, algorithm: Algorithm) -> Option<f64> {
        self.summary(algorithm).and_then(|s| s.accuracy)
    }
}
