//! Run configuration shared by every subcommand, loadable from a JSON file.
//!
//! ```json
//! {
//!   "kcdc": { "delta": 0.0001, "bandwidth": "median_heuristic", "ridge": 0.001 },
//!   "igci": { "delta": 0.0001, "igci_reference": "uniform_rescale" },
//!   "embedding": { "k_neighbors": null, "disconnected_policy": "GrowK" },
//!   "n_bootstraps": 25,
//!   "subsample_fraction": 0.95,
//!   "mod_kcdc_table": { "rows": [ ... ] },
//!   "mod_igci_table": { "rows": [ ... ] },
//!   "can": { "hsic_alpha": 0.05, "max_refits": 5, "ratio_low": 0.65, "ratio_high": 1.65 }
//! }
//! ```
//!
//! Every key is optional; missing keys take the defaults shown.

use std::fs;
use std::path::Path;

use anyhow::Context;
use confound_core::can::CanConfig;
use confound_core::detector::{DetectorConfig, ThresholdTable};
use confound_core::manifold::EmbeddingConfig;
use confound_core::scorers::{ScorerConfig, ScorerKind};
use confound_core::RngSeed;
use serde::{Deserialize, Serialize};

use crate::Algorithm;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub kcdc: ScorerConfig,
    pub igci: ScorerConfig,
    pub embedding: EmbeddingConfig,
    pub n_bootstraps: usize,
    pub subsample_fraction: f64,
    pub mod_kcdc_table: ThresholdTable,
    pub mod_igci_table: ThresholdTable,
    pub can: CanConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            kcdc: ScorerConfig::kcdc(),
            igci: ScorerConfig::igci(),
            embedding: EmbeddingConfig::default(),
            n_bootstraps: 25,
            subsample_fraction: 0.95,
            mod_kcdc_table: ThresholdTable::mod_kcdc(),
            mod_igci_table: ThresholdTable::mod_igci(),
            can: CanConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> anyhow::Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        // the scorer kind is implied by the section it sits in
        cfg.kcdc.scorer = ScorerKind::KCDC;
        cfg.igci.scorer = ScorerKind::IGCI;
        Ok(cfg)
    }

    pub fn scorer(&self, kind: ScorerKind) -> ScorerConfig {
        match kind {
            ScorerKind::KCDC => self.kcdc,
            ScorerKind::IGCI => self.igci,
        }
    }

    /// Detector configuration for a modified scorer.
    pub fn detector(&self, algorithm: Algorithm, seed: RngSeed) -> Option<DetectorConfig> {
        let (kind, table) = match algorithm {
            Algorithm::ModKCDC => (ScorerKind::KCDC, &self.mod_kcdc_table),
            Algorithm::ModIGCI => (ScorerKind::IGCI, &self.mod_igci_table),
            _ => return None,
        };
        Some(DetectorConfig {
            scorer: self.scorer(kind),
            embedding: self.embedding,
            n_bootstraps: self.n_bootstraps,
            subsample_fraction: self.subsample_fraction,
            table: Some(table.clone()),
            seed,
        })
    }

    pub fn can(&self, seed: RngSeed) -> CanConfig {
        CanConfig { seed, ..self.can.clone() }
    }
}
