//! Experiment harness: accuracy sweeps over the synthetic families, the
//! noise-strength sensitivity curve, and runs on user-supplied real pairs.

pub mod config;
pub mod experiment;
pub mod real;
pub mod report;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use config::RunConfig;
pub use experiment::{run_accuracy, run_algorithm, run_sensitivity, ExperimentPlan, SensitivityPoint};
pub use real::{run_real, RealResult};
pub use report::{AlgorithmSummary, DatasetRecord, ExperimentReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "modKCDC")]
    ModKCDC,
    #[serde(rename = "modIGCI")]
    ModIGCI,
    KCDC,
    IGCI,
    CAN,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] =
        [Algorithm::ModKCDC, Algorithm::ModIGCI, Algorithm::KCDC, Algorithm::IGCI, Algorithm::CAN];

    /// CAN excludes fit failures from its accuracy denominator.
    pub fn excludes_failures(self) -> bool {
        self == Algorithm::CAN
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::ModKCDC => "modKCDC",
            Algorithm::ModIGCI => "modIGCI",
            Algorithm::KCDC => "KCDC",
            Algorithm::IGCI => "IGCI",
            Algorithm::CAN => "CAN",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown algorithm `{s}` (expected modKCDC, modIGCI, KCDC, IGCI or CAN)"))
    }
}
