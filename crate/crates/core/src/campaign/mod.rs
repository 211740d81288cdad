//! Test campaign: amplitude bounding with sinusoidal probes, test-set
//! generation, batched execution and repetition-count calibration.

mod bound;
mod calibrate;
mod execute;
mod generate;

pub use bound::{
    binary_search_upperbound, optimistic_amplitude_bound, AmplitudeBoundMap, BoundDiagnostic,
    BoundEntry, BoundSearch, BoundingOptions, BoundingReport, Midpoint, Probe,
};
pub use calibrate::{choose_num_periods, Calibration, DEFAULT_MAX_PERIODS};
pub use execute::{execute_campaign, extended_float, run_test, TestResult};
pub use generate::{
    derive_frequency_resolution, generate_test_set, GeneratedTest, SamplingOptions, TestSet,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plants::{run_plant, PlantSpec};
use crate::signals::{
    render_reference, snap_time_gain, ShapeKind, TestCase, DEFAULT_SAMPLE_INTERVAL,
};
use crate::spectral::{DnlNormalization, TraceSpectra};

/// Ranges, resolution and thresholds that parametrise a campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequiredInput {
    /// Hz
    pub f_min: f64,
    /// Hz
    pub f_max: f64,
    pub a_max: f64,
    /// Amplitude resolution.
    pub delta_a: f64,
    pub dnl_threshold: f64,
    pub rho: f64,
    /// Shape periods per test.
    pub base_periods: u32,
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

impl RequiredInput {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        let finite = [
            self.f_min,
            self.f_max,
            self.a_max,
            self.delta_a,
            self.dnl_threshold,
            self.rho,
            self.sample_interval,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("all required inputs must be finite".into());
        }
        if !(0.0 < self.f_min && self.f_min < self.f_max) {
            return bad(format!("need 0 < f_min < f_max, got {} and {}", self.f_min, self.f_max));
        }
        if !(0.0 < self.delta_a && self.delta_a < self.a_max) {
            return bad(format!(
                "need 0 < delta_a < a_max, got {} and {}",
                self.delta_a, self.a_max
            ));
        }
        if !(self.dnl_threshold > 0.0 && self.dnl_threshold <= 1.0) {
            return bad(format!("dnl_threshold must lie in (0, 1], got {}", self.dnl_threshold));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return bad(format!("rho must lie in (0, 1), got {}", self.rho));
        }
        if self.base_periods < 1 {
            return bad("base_periods must be >= 1".into());
        }
        if !(self.sample_interval > 0.0 && self.sample_interval * self.f_max < 0.5) {
            return bad(format!(
                "sample_interval {} cannot represent f_max {}",
                self.sample_interval, self.f_max
            ));
        }
        Ok(())
    }

    /// Sinusoidal test case whose main component sits at `frequency`, snapped
    /// to the sample grid and kept inside `[f_min, f_max]`.
    pub fn sine_case(&self, frequency: f64, amplitude: f64) -> Result<TestCase> {
        let snapped = snap_time_gain(frequency, self.sample_interval, Some((self.f_min, self.f_max)))?;
        Ok(TestCase {
            shape: ShapeKind::Sine,
            amp_gain: amplitude,
            time_gain: snapped.time_gain,
            periods: self.base_periods,
            sample_interval: self.sample_interval,
        })
    }
}

/// Something that reports the degree of non-linearity of a sinusoidal test.
pub trait SineProbe {
    /// `+inf` stands for a diverged run.
    fn sine_dnl(&self, frequency: f64, amplitude: f64, input: &RequiredInput) -> Result<f64>;

    /// Frequency actually exercised when `frequency` is requested. Two
    /// requests with the same effective frequency are the same test.
    fn effective_frequency(&self, frequency: f64, _input: &RequiredInput) -> Result<f64> {
        Ok(frequency)
    }
}

impl SineProbe for PlantSpec {
    fn sine_dnl(&self, frequency: f64, amplitude: f64, input: &RequiredInput) -> Result<f64> {
        let case = input.sine_case(frequency, amplitude)?;
        let reference = render_reference(&case)?;
        match run_plant(self, &reference) {
            Ok((trace, _)) => TraceSpectra::new(&trace, input.rho)?
                .degree_of_nonlinearity(input.dnl_normalization),
            Err(Error::Diverged { .. }) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    }

    fn effective_frequency(&self, frequency: f64, input: &RequiredInput) -> Result<f64> {
        Ok(input.sine_case(frequency, 0.0)?.time_gain)
    }
}

/// Adapts a closure `(frequency, amplitude) -> dnl` into a probe.
pub struct FnProbe<F>(pub F);

impl<F: Fn(f64, f64) -> f64> SineProbe for FnProbe<F> {
    fn sine_dnl(&self, frequency: f64, amplitude: f64, _input: &RequiredInput) -> Result<f64> {
        Ok((self.0)(frequency, amplitude))
    }
}

#[cfg(test)]
pub(crate) fn drone_input() -> RequiredInput {
    RequiredInput {
        f_min: 0.1,
        f_max: 2.0,
        a_max: 6.0,
        delta_a: 0.05,
        dnl_threshold: 0.15,
        rho: 0.1,
        base_periods: 3,
        sample_interval: 0.001,
        seed: 7,
        dnl_normalization: DnlNormalization::IncludeDc,
    }
}
