//! Experiment configuration shared by the command-line front end and the suite.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::growth::{GrowthConfig, GrowthSpec};
use crate::oracle::DEFAULT_COUNT_CAP;

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_TRIALS: usize = 10_000;

/// Everything needed to re-run an experiment bit-identically.
///
/// `growth` carries `cap_depth` and `truncation_k`; `count_cap` bounds the
/// per-atom counts of the discrete oracle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub growth: GrowthConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_count_cap")]
    pub count_cap: usize,
    #[serde(default)]
    pub out: Option<String>,
}

fn default_trials() -> usize {
    DEFAULT_TRIALS
}

fn default_count_cap() -> usize {
    DEFAULT_COUNT_CAP
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            growth: GrowthConfig::default(),
            seed: DEFAULT_SEED,
            trials: DEFAULT_TRIALS,
            count_cap: DEFAULT_COUNT_CAP,
            out: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidParameter(format!("config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// The validated growth spec.
    pub fn spec(&self) -> Result<GrowthSpec> {
        GrowthSpec::new(self.growth.clone())
    }

    pub fn validate(&self) -> Result<()> {
        self.spec()?;
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be positive".into()));
        }
        if self.count_cap == 0 {
            return Err(Error::InvalidParameter("count_cap must be positive".into()));
        }
        Ok(())
    }

    /// The resolved form embedded in every report.
    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_missing_fields() {
        let c = ExperimentConfig::from_json(r#"{"seed": 9, "growth": {"m": [3, 5]}}"#).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.trials, DEFAULT_TRIALS);
        assert!(c.growth.repeat_last);
        assert_eq!(c.spec().unwrap().m(1).unwrap(), 5);
    }

    #[test]
    fn round_trip_and_rejections() {
        let c = ExperimentConfig { seed: 3, out: Some("x.jsonl".into()), ..Default::default() };
        let back = ExperimentConfig::from_json(&c.to_value().to_string()).unwrap();
        assert_eq!(back, c);
        assert!(ExperimentConfig::from_json(r#"{"sed": 1}"#).is_err());
        let bad = ExperimentConfig { growth: GrowthConfig { m: vec![1], ..Default::default() }, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
