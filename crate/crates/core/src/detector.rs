//! The common-cause detector.
//!
//! For each bootstrap subsample the point cloud is embedded onto a latent `T`,
//! the directed scorer is run on `(A, T)` and `(B, T)`, and the two score gaps
//! `g_A = |v_{A->T} - v_{T->A}|`, `g_B = |v_{B->T} - v_{T->B}|` are combined
//! into
//!
//! ```text
//! delta = | g_A - g_B | / max(g_A, g_B)
//! ```
//!
//! A value near 1 means one link is underdetermined, which is the signature of
//! a directed structure; both links carrying signal pushes `delta` down. The
//! mean and variance of `delta` across subsamples are looked up in a
//! [`ThresholdTable`].

use serde::{Deserialize, Serialize};

use crate::data::{self, BivariateDataset, CausalVerdict, VerdictTag};
use crate::error::{Error, Result};
use crate::manifold::{self, EmbeddingConfig};
use crate::rng::RngSeed;
use crate::scorers::{self, DirectedScores, Direction, ScorerConfig, ScorerKind};
use crate::stats;

/// Normalized difference of the two links' score gaps. Defined as 0 when
/// both gaps vanish.
pub fn delta_statistic(v_at: f64, v_ta: f64, v_bt: f64, v_tb: f64) -> f64 {
    let ga = (v_at - v_ta).abs();
    let gb = (v_bt - v_tb).abs();
    let m = ga.max(gb);
    if m == 0.0 {
        return 0.0;
    }
    ((ga - gb).abs() / m).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaStats {
    pub deltas: Vec<f64>,
    pub mean: f64,
    pub var: f64,
}

impl DeltaStats {
    pub fn from_deltas(deltas: Vec<f64>) -> Self {
        let mean = stats::mean(&deltas);
        let var = stats::variance(&deltas);
        DeltaStats { deltas, mean, var }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BelowAction {
    Directed,
    Failure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AboveAction {
    CommonCause,
    Failure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum BoundaryPolicy {
    /// Rows are `[low, high)`; the last row also contains its upper bound.
    #[default]
    LowerInclusive,
}

/// One mean region: variance `<= var_threshold` takes `below_action`,
/// larger variance takes `above_action`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub mean_low: f64,
    pub mean_high: f64,
    pub var_threshold: f64,
    pub below_action: BelowAction,
    pub above_action: AboveAction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTable {
    pub rows: Vec<ThresholdRow>,
    #[serde(default)]
    pub boundary_policy: BoundaryPolicy,
}

const fn row(low: f64, high: f64, gamma: f64, below: BelowAction, above: AboveAction) -> ThresholdRow {
    ThresholdRow { mean_low: low, mean_high: high, var_threshold: gamma, below_action: below, above_action: above }
}

impl ThresholdTable {
    /// Published thresholds for the KCDC-based detector.
    pub fn mod_kcdc() -> Self {
        use AboveAction::CommonCause as CC;
        use BelowAction::{Directed, Failure};
        ThresholdTable {
            rows: vec![
                row(0.0, 0.25, 0.03, Failure, CC),
                row(0.25, 0.65, 0.03, Directed, CC),
                row(0.65, 0.9, 0.06, Directed, CC),
                row(0.9, 1.0, 0.06, Directed, AboveAction::Failure),
            ],
            boundary_policy: BoundaryPolicy::LowerInclusive,
        }
    }

    /// Published thresholds for the IGCI-based detector.
    pub fn mod_igci() -> Self {
        use AboveAction::CommonCause as CC;
        use BelowAction::{Directed, Failure};
        ThresholdTable {
            rows: vec![
                row(0.0, 0.25, 0.01, Failure, CC),
                row(0.25, 0.45, 0.01, Directed, CC),
                row(0.45, 0.9, 0.02, Directed, CC),
                row(0.9, 1.0, 0.02, Directed, AboveAction::Failure),
            ],
            boundary_policy: BoundaryPolicy::LowerInclusive,
        }
    }

    pub fn for_scorer(kind: ScorerKind) -> Self {
        match kind {
            ScorerKind::KCDC => Self::mod_kcdc(),
            ScorerKind::IGCI => Self::mod_igci(),
        }
    }

    /// Rows must tile `[0, 1]` in order, and variance thresholds must not
    /// decrease from one row to the next.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(format!("threshold table: {msg}")));
        let (first, last) = match (self.rows.first(), self.rows.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => return bad("no rows".into()),
        };
        if first.mean_low != 0.0 || last.mean_high != 1.0 {
            return bad("rows must span [0, 1]".into());
        }
        for (i, r) in self.rows.iter().enumerate() {
            if !(r.mean_low < r.mean_high) {
                return bad(format!("row {i} has empty mean range"));
            }
            if !(r.var_threshold >= 0.0) {
                return bad(format!("row {i} has negative variance threshold"));
            }
        }
        for (i, w) in self.rows.windows(2).enumerate() {
            if w[0].mean_high != w[1].mean_low {
                return bad(format!("gap or overlap between rows {i} and {}", i + 1));
            }
            if w[0].var_threshold > w[1].var_threshold {
                return bad(format!("variance threshold decreases between rows {i} and {}", i + 1));
            }
        }
        Ok(())
    }

    /// Row containing `mean`; values outside `[0, 1]` clamp to the end rows.
    pub fn lookup(&self, mean: f64) -> &ThresholdRow {
        let last = self.rows.len() - 1;
        self.rows
            .iter()
            .position(|r| mean < r.mean_high)
            .map_or(&self.rows[last], |i| &self.rows[i])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    #[serde(default)]
    pub scorer: ScorerConfig,
    #[serde(default)]
    pub embedding: EmbeddingConfig,
    #[serde(default = "default_bootstraps")]
    pub n_bootstraps: usize,
    #[serde(default = "default_fraction")]
    pub subsample_fraction: f64,
    /// Falls back to the published table for the configured scorer.
    #[serde(default)]
    pub table: Option<ThresholdTable>,
    #[serde(default)]
    pub seed: RngSeed,
}

fn default_bootstraps() -> usize {
    25
}

fn default_fraction() -> f64 {
    0.95
}

impl Default for RngSeed {
    fn default() -> Self {
        RngSeed(0)
    }
}

impl DetectorConfig {
    pub fn new(scorer: ScorerConfig, seed: RngSeed) -> Self {
        DetectorConfig {
            scorer,
            embedding: EmbeddingConfig::default(),
            n_bootstraps: default_bootstraps(),
            subsample_fraction: default_fraction(),
            table: None,
            seed,
        }
    }

    pub fn mod_kcdc(seed: RngSeed) -> Self {
        Self::new(ScorerConfig::kcdc(), seed)
    }

    pub fn mod_igci(seed: RngSeed) -> Self {
        Self::new(ScorerConfig::igci(), seed)
    }

    pub fn table(&self) -> ThresholdTable {
        self.table
            .clone()
            .unwrap_or_else(|| ThresholdTable::for_scorer(self.scorer.scorer))
    }

    pub fn validate(&self) -> Result<()> {
        self.scorer.validate()?;
        self.embedding.validate()?;
        if self.n_bootstraps < 2 {
            return Err(Error::InvalidArgument(format!(
                "n_bootstraps must be >= 2, got {}",
                self.n_bootstraps
            )));
        }
        if !(self.subsample_fraction > 0.0 && self.subsample_fraction <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "subsample_fraction must be in (0, 1], got {}",
                self.subsample_fraction
            )));
        }
        self.table().validate()
    }
}

/// Score both links of one (sub)sample against its embedding.
pub fn link_scores(
    d: &BivariateDataset,
    cfg: &DetectorConfig,
) -> Result<(DirectedScores, DirectedScores)> {
    let emb = manifold::isomap_embed(d, &cfg.embedding)?;
    let (a, b): (Vec<f64>, Vec<f64>) = emb.kept_indices.iter().map(|&i| (d.a()[i], d.b()[i])).unzip();
    let at = cfg.scorer.score(&a, &emb.t)?;
    let bt = cfg.scorer.score(&b, &emb.t)?;
    Ok((at, bt))
}

fn one_delta(d: &BivariateDataset, cfg: &DetectorConfig, iteration: usize) -> Result<f64> {
    let sub = data::subsample(d, cfg.subsample_fraction, cfg.seed.derive(iteration as u64))?;
    let (at, bt) = link_scores(&sub, cfg).map_err(|e| match e {
        e @ (Error::TooFewPoints { .. } | Error::DegenerateSpectrum(_)) => {
            Error::EmbeddingFailure { iteration, source: Box::new(e) }
        }
        e => e,
    })?;
    Ok(delta_statistic(at.v_xy, at.v_yx, bt.v_xy, bt.v_yx))
}

/// Delta on `n_bootstraps` subsamples. Iteration `i` draws its subsample from
/// `seed.derive(i)`, so results do not depend on evaluation order.
pub fn bootstrap_deltas(d: &BivariateDataset, cfg: &DetectorConfig) -> Result<DeltaStats> {
    cfg.validate()?;
    let deltas = (0..cfg.n_bootstraps)
        .map(|i| one_delta(d, cfg, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(DeltaStats::from_deltas(deltas))
}

/// Map bootstrap statistics to a verdict. Directed outcomes are oriented by
/// the plain scorer's result on `(A, B)`.
pub fn classify(stats: &DeltaStats, table: &ThresholdTable, directed_tiebreak: DirectedScores) -> CausalVerdict {
    let r = table.lookup(stats.mean);
    if stats.var <= r.var_threshold {
        match r.below_action {
            BelowAction::Directed => match scorers::decide_direction(directed_tiebreak, 0.0) {
                Direction::XtoY => CausalVerdict::new(VerdictTag::AtoB),
                Direction::YtoX => CausalVerdict::new(VerdictTag::BtoA),
                Direction::Undetermined => CausalVerdict::with_detail(VerdictTag::Undecided, "tied directed scores"),
            },
            BelowAction::Failure => CausalVerdict::with_detail(
                VerdictTag::Undecided,
                format!(
                    "failure mode: low delta mean ({:.3}) with low variance ({:.2e} <= {})",
                    stats.mean, stats.var, r.var_threshold
                ),
            ),
        }
    } else {
        match r.above_action {
            AboveAction::CommonCause => CausalVerdict::new(VerdictTag::CommonCause),
            AboveAction::Failure => CausalVerdict::with_detail(
                VerdictTag::Undecided,
                format!(
                    "failure mode: high delta mean ({:.3}) with high variance ({:.2e} > {})",
                    stats.mean, stats.var, r.var_threshold
                ),
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discovery {
    pub verdict: CausalVerdict,
    pub stats: DeltaStats,
    /// Plain scorer output on the full normalized `(A, B)`.
    pub directed: DirectedScores,
}

/// Normalize, bootstrap delta, and classify.
pub fn discover(d: &BivariateDataset, cfg: &DetectorConfig) -> Result<Discovery> {
    cfg.validate()?;
    let d = data::normalize_unit_variance(d)?;
    let stats = bootstrap_deltas(&d, cfg)?;
    let directed = cfg.scorer.score(d.a(), d.b())?;
    let mut verdict = classify(&stats, &cfg.table(), directed);
    let summary = format!("delta mean={:.4} var={:.3e} n={}", stats.mean, stats.var, stats.deltas.len());
    verdict.detail = Some(match verdict.detail.take() {
        Some(d) => format!("{d}; {summary}"),
        None => summary,
    });
    Ok(Discovery { verdict, stats, directed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_examples() {
        assert_eq!(delta_statistic(1.0, 1.0, 0.0, 5.0), 1.0);
        assert_eq!(delta_statistic(0.0, 3.0, 5.0, 2.0), 0.0);
        assert!((delta_statistic(0.0, 1.0, 0.0, 3.0) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(delta_statistic(2.0, 2.0, -1.0, -1.0), 0.0);
    }

    #[test]
    fn published_tables_validate() {
        ThresholdTable::mod_kcdc().validate().unwrap();
        ThresholdTable::mod_igci().validate().unwrap();
    }

    #[test]
    fn table_validation_catches_gaps() {
        let mut t = ThresholdTable::mod_kcdc();
        t.rows[1].mean_low = 0.3;
        assert!(t.validate().is_err());
        let mut t = ThresholdTable::mod_igci();
        t.rows[3].var_threshold = 0.001;
        assert!(t.validate().is_err());
    }

    #[test]
    fn lookup_boundaries() {
        let t = ThresholdTable::mod_kcdc();
        assert_eq!(t.lookup(0.0).mean_low, 0.0);
        assert_eq!(t.lookup(0.25).mean_low, 0.25);
        assert_eq!(t.lookup(0.65).mean_low, 0.65);
        assert_eq!(t.lookup(0.9).mean_low, 0.9);
        assert_eq!(t.lookup(1.0).mean_low, 0.9);
    }

    fn stats(mean: f64, var: f64) -> DeltaStats {
        DeltaStats { deltas: vec![], mean, var }
    }

    #[test]
    fn classify_published_points() {
        let t = ThresholdTable::mod_kcdc();
        let tie = DirectedScores { v_xy: 0.1, v_yx: 0.5 };
        assert_eq!(classify(&stats(0.933, 0.007), &t, tie).tag, VerdictTag::AtoB);
        assert_eq!(classify(&stats(0.933, 0.007), &t, tie.swapped()).tag, VerdictTag::BtoA);
        assert_eq!(classify(&stats(0.491, 0.081), &t, tie).tag, VerdictTag::CommonCause);
        assert_eq!(classify(&stats(0.639, 0.086), &t, tie).tag, VerdictTag::CommonCause);
        let fail = classify(&stats(0.95, 0.10), &t, tie);
        assert_eq!(fail.tag, VerdictTag::Undecided);
        assert!(fail.detail.unwrap().contains("failure mode"));
        assert_eq!(classify(&stats(0.1, 0.01), &t, tie).tag, VerdictTag::Undecided);
    }

    #[test]
    fn config_defaults_and_json() {
        let c: DetectorConfig = serde_json::from_str(r#"{"scorer":{"scorer":"IGCI"},"seed":9}"#).unwrap();
        assert_eq!(c.n_bootstraps, 25);
        assert_eq!(c.subsample_fraction, 0.95);
        assert_eq!(c.table(), ThresholdTable::mod_igci());
        assert_eq!(c.seed, RngSeed(9));
        c.validate().unwrap();
        let mut bad = c.clone();
        bad.n_bootstraps = 1;
        assert!(bad.validate().is_err());
    }
}
