use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diffusion::{InitialTypes, ReverseVariant, SamplerOptions};
use crate::error::{Error, Result};
use crate::metrics::{CoverageThresholds, MatchCriteria};
use crate::model::{ModelConfig, TrainConfig};
use crate::schedule::ScheduleConfig;

/// Environment variable that overrides [`RunConfig::seed`].
pub const SEED_ENV: &str = "DPCV_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplerConfig {
    pub variant: ReverseVariant,
    pub initial_types: InitialTypes,
    pub langevin_noise: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self { variant: ReverseVariant::Periodic, initial_types: InitialTypes::Categorical, langevin_noise: true }
    }
}

impl SamplerConfig {
    pub fn options(&self) -> SamplerOptions {
        SamplerOptions { variant: self.variant, langevin_noise: self.langevin_noise }
    }
}

/// Everything a run needs. Missing sections take their defaults; unknown
/// keys are rejected.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub schedule: ScheduleConfig,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub sampler: SamplerConfig,
    pub matcher: MatchCriteria,
    pub coverage: CoverageThresholds,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Applies `DPCV_SEED` if set.
    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.seed = v.trim().parse().map_err(|_| Error::Config(format!("{SEED_ENV}={v} is not an integer")))?;
        }
        Ok(())
    }

    /// Checks everything except the model vocabulary, which may still be
    /// filled from data.
    pub fn validate(&self) -> Result<()> {
        self.schedule.build()?;
        self.train.validate()?;
        self.matcher.validate()?;
        if self.coverage.composition.is_nan() || self.coverage.structure.is_nan() {
            return Err(Error::Config("coverage thresholds must not be NaN".into()));
        }
        Ok(())
    }
}
