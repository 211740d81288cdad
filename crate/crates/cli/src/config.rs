//! Campaign configuration file (TOML).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use scopeprobe::analysis::AnalysisOptions;
use scopeprobe::campaign::{BoundingOptions, RequiredInput, SamplingOptions, DEFAULT_MAX_PERIODS};
use scopeprobe::plants::PlantSpec;
use scopeprobe::signals::{ShapeKind, DEFAULT_SAMPLE_INTERVAL};
use scopeprobe::spectral::DnlNormalization;

use crate::CliError;

/// Required input as written in the file. `base_periods` may be left to the
/// calibration step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSection {
    pub f_min: f64,
    pub f_max: f64,
    pub a_max: f64,
    pub delta_a: f64,
    pub dnl_threshold: f64,
    pub rho: f64,
    #[serde(default)]
    pub base_periods: Option<u32>,
    #[serde(default = "default_sample_interval")]
    pub sample_interval: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub dnl_normalization: DnlNormalization,
}

fn default_sample_interval() -> f64 {
    DEFAULT_SAMPLE_INTERVAL
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationSection {
    /// Shape of the stress test.
    pub shape: ShapeKind,
    pub max_periods: u32,
}

impl Default for CalibrationSection {
    fn default() -> Self {
        CalibrationSection {
            shape: ShapeKind::Sine,
            max_periods: DEFAULT_MAX_PERIODS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    /// Shapes of the generated tests.
    pub shapes: Vec<ShapeKind>,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    pub input: InputSection,
    pub plant: PlantSpec,
    #[serde(default)]
    pub calibration: CalibrationSection,
    #[serde(default)]
    pub bounding: BoundingOptions,
    #[serde(default)]
    pub sampling: SamplingOptions,
    #[serde(default)]
    pub analysis: AnalysisOptions,
}

impl CampaignConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let config: CampaignConfig =
            toml::from_str(text).map_err(|e| CliError::Invalid(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.shapes.is_empty() {
            return Err(CliError::Invalid("config: shapes must not be empty".into()));
        }
        if self.workers == Some(0) {
            return Err(CliError::Invalid("config: workers must be >= 1".into()));
        }
        if self.input.sample_interval != self.plant.sample_interval {
            return Err(CliError::Invalid(format!(
                "config: input sample_interval {} differs from plant sample_interval {}",
                self.input.sample_interval, self.plant.sample_interval
            )));
        }
        self.plant.validate()?;
        self.required_input(self.input.base_periods.unwrap_or(1))
            .validate()?;
        Ok(())
    }

    pub fn required_input(&self, base_periods: u32) -> RequiredInput {
        let i = &self.input;
        RequiredInput {
            f_min: i.f_min,
            f_max: i.f_max,
            a_max: i.a_max,
            delta_a: i.delta_a,
            dnl_threshold: i.dnl_threshold,
            rho: i.rho,
            base_periods,
            sample_interval: i.sample_interval,
            seed: i.seed,
            dnl_normalization: i.dnl_normalization,
        }
    }
}
