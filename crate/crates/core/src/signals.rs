//! Unit-period shapes and reference rendering.
//!
//! Every shape is periodic with period 1 and spans the value range `[0, 1]`,
//! starting from its low value at phase 0. A reference is
//! `r(t) = amp_gain * shape(time_gain * t)`, rendered over an integer number
//! of periods so that the period boundaries fall on DFT bins.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default sample interval in seconds.
pub const DEFAULT_SAMPLE_INTERVAL: f64 = 0.001;

/// Relative slack accepted when checking that a period is a whole number of samples.
const PERIOD_ALIGNMENT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeKind {
    Sine,
    /// Also called "steps": low for the first half period, high for the second.
    #[serde(alias = "steps")]
    Square,
    Sawtooth,
    Triangle,
    Trapezoid,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 5] = [
        ShapeKind::Sine,
        ShapeKind::Square,
        ShapeKind::Sawtooth,
        ShapeKind::Triangle,
        ShapeKind::Trapezoid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ShapeKind::Sine => "sine",
            ShapeKind::Square => "square",
            ShapeKind::Sawtooth => "sawtooth",
            ShapeKind::Triangle => "triangle",
            ShapeKind::Trapezoid => "trapezoid",
        }
    }
}

impl fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ShapeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sine" => Ok(ShapeKind::Sine),
            "square" | "steps" => Ok(ShapeKind::Square),
            "sawtooth" => Ok(ShapeKind::Sawtooth),
            "triangle" => Ok(ShapeKind::Triangle),
            "trapezoid" => Ok(ShapeKind::Trapezoid),
            other => Err(Error::InvalidTestCase(format!("unknown shape `{other}`"))),
        }
    }
}

/// Value of the unit-period, unit-range shape at `phase`.
///
/// Panics if `phase` is outside `[0, 1)`.
pub fn eval_shape(shape: ShapeKind, phase: f64) -> f64 {
    assert!(
        (0.0..1.0).contains(&phase),
        "shape phase must lie in [0, 1), got {phase}"
    );
    match shape {
        ShapeKind::Sine => 0.5 + 0.5 * (2.0 * PI * phase).sin(),
        ShapeKind::Square => {
            if phase < 0.5 {
                0.0
            } else {
                1.0
            }
        }
        ShapeKind::Sawtooth => phase,
        ShapeKind::Triangle => {
            if phase < 0.5 {
                2.0 * phase
            } else {
                2.0 - 2.0 * phase
            }
        }
        ShapeKind::Trapezoid => {
            if phase < 0.25 {
                4.0 * phase
            } else if phase < 0.5 {
                1.0
            } else if phase < 0.75 {
                1.0 - 4.0 * (phase - 0.5)
            } else {
                0.0
            }
        }
    }
}

/// Fully determines one reference signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestCase {
    pub shape: ShapeKind,
    /// Amplitude gain, in output units.
    pub amp_gain: f64,
    /// Time gain in 1/s; `1 / time_gain` is the duration of one shape period.
    pub time_gain: f64,
    /// Number of shape periods rendered.
    pub periods: u32,
    /// Sample interval in seconds.
    pub sample_interval: f64,
}

impl TestCase {
    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidTestCase(msg));
        if !(self.amp_gain.is_finite() && self.amp_gain >= 0.0) {
            return invalid(format!("amp_gain must be finite and >= 0, got {}", self.amp_gain));
        }
        if !(self.time_gain.is_finite() && self.time_gain > 0.0) {
            return invalid(format!("time_gain must be finite and > 0, got {}", self.time_gain));
        }
        if self.periods < 1 {
            return invalid("periods must be >= 1".into());
        }
        if !(self.sample_interval.is_finite() && self.sample_interval > 0.0) {
            return invalid(format!(
                "sample_interval must be finite and > 0, got {}",
                self.sample_interval
            ));
        }
        if self.sample_interval * self.time_gain >= 0.5 {
            return invalid(format!(
                "need at least two samples per period (time_gain {} at dt {})",
                self.time_gain, self.sample_interval
            ));
        }
        self.samples_per_period().map(|_| ())
    }

    /// Number of samples in one shape period; errors when the period is not
    /// a whole number of samples.
    pub fn samples_per_period(&self) -> Result<usize> {
        let exact = 1.0 / (self.time_gain * self.sample_interval);
        let rounded = exact.round();
        if rounded < 2.0 || ((exact - rounded).abs() / rounded) > PERIOD_ALIGNMENT_TOLERANCE {
            return Err(Error::InvalidTestCase(format!(
                "period 1/{} s is not an integer multiple of the sample interval {} s",
                self.time_gain, self.sample_interval
            )));
        }
        Ok(rounded as usize)
    }

    pub fn duration(&self) -> f64 {
        f64::from(self.periods) / self.time_gain
    }
}

/// A uniformly sampled signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    samples: Vec<f64>,
    sample_interval: f64,
}

impl TimeSeries {
    pub fn new(samples: Vec<f64>, sample_interval: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidSignal("time series is empty".into()));
        }
        if !(sample_interval.is_finite() && sample_interval > 0.0) {
            return Err(Error::InvalidSignal(format!(
                "sample interval must be positive, got {sample_interval}"
            )));
        }
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidSignal(format!("non-finite sample at index {i}")));
        }
        Ok(TimeSeries {
            samples,
            sample_interval,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_interval(&self) -> f64 {
        self.sample_interval
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 * self.sample_interval
    }

    /// The first `len` samples.
    pub fn prefix(&self, len: usize) -> Result<TimeSeries> {
        if len == 0 || len > self.samples.len() {
            return Err(Error::InvalidSignal(format!(
                "prefix length {len} outside 1..={}",
                self.samples.len()
            )));
        }
        Ok(TimeSeries {
            samples: self.samples[..len].to_vec(),
            sample_interval: self.sample_interval,
        })
    }

    pub fn scaled(&self, factor: f64) -> Result<TimeSeries> {
        TimeSeries::new(
            self.samples.iter().map(|x| x * factor).collect(),
            self.sample_interval,
        )
    }
}

/// Reference and output of one execution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    reference: TimeSeries,
    output: TimeSeries,
}

impl Trace {
    pub fn new(reference: TimeSeries, output: TimeSeries) -> Result<Self> {
        if reference.len() != output.len() {
            return Err(Error::InvalidSignal(format!(
                "reference has {} samples, output {}",
                reference.len(),
                output.len()
            )));
        }
        if reference.sample_interval() != output.sample_interval() {
            return Err(Error::InvalidSignal(
                "reference and output sample intervals differ".into(),
            ));
        }
        Ok(Trace { reference, output })
    }

    pub fn reference(&self) -> &TimeSeries {
        &self.reference
    }

    pub fn output(&self) -> &TimeSeries {
        &self.output
    }

    pub fn len(&self) -> usize {
        self.reference.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reference.is_empty()
    }

    pub fn prefix(&self, len: usize) -> Result<Trace> {
        Trace::new(self.reference.prefix(len)?, self.output.prefix(len)?)
    }
}

/// Samples `amp_gain * shape(frac(time_gain * n * dt))` over `periods` periods.
///
/// The phase is computed as `(n mod samples_per_period) / samples_per_period`,
/// which equals `frac(time_gain * n * dt)` for an aligned period without
/// accumulating rounding across periods.
pub fn render_reference(tc: &TestCase) -> Result<TimeSeries> {
    tc.validate()?;
    let per_period = tc.samples_per_period()?;
    let total = per_period * tc.periods as usize;
    let period_len = per_period as f64;
    let samples = (0..total)
        .map(|n| tc.amp_gain * eval_shape(tc.shape, (n % per_period) as f64 / period_len))
        .collect();
    TimeSeries::new(samples, tc.sample_interval)
}

/// Ratio between the frequency of a shape's largest non-DC component and
/// its time gain.
pub fn shape_fundamental_ratio(shape: ShapeKind) -> f64 {
    const SAMPLES: usize = 1024;
    let one_period = TestCase {
        shape,
        amp_gain: 1.0,
        time_gain: 1.0,
        periods: 1,
        sample_interval: 1.0 / SAMPLES as f64,
    };
    let series = render_reference(&one_period).expect("unit period renders");
    let spectrum = crate::spectral::dft_amplitude(&series).expect("non-trivial series");
    spectrum
        .main_component()
        .map(|c| c.frequency)
        .expect("built-in shapes are not constant")
}

/// A time gain snapped so one period is a whole number of samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnappedTimeGain {
    pub time_gain: f64,
    pub samples_per_period: usize,
    /// `time_gain - requested`.
    pub snap_error: f64,
}

/// Snaps `requested` (1/s) to the nearest time gain whose period is an
/// integer number of samples. When `limits` is given, the snapped value is
/// nudged by one sample so it stays inside the closed range if possible.
pub fn snap_time_gain(
    requested: f64,
    sample_interval: f64,
    limits: Option<(f64, f64)>,
) -> Result<SnappedTimeGain> {
    if !(requested.is_finite() && requested > 0.0) {
        return Err(Error::InvalidTestCase(format!(
            "time gain must be positive, got {requested}"
        )));
    }
    let mut samples = (1.0 / (requested * sample_interval)).round().max(2.0);
    let gain = |n: f64| 1.0 / (n * sample_interval);
    if let Some((lo, hi)) = limits {
        if gain(samples) > hi && samples < f64::MAX {
            samples += 1.0;
        }
        if gain(samples) < lo && samples > 2.0 {
            samples -= 1.0;
        }
    }
    if samples < 3.0 {
        return Err(Error::InvalidTestCase(format!(
            "time gain {requested} is too fast for sample interval {sample_interval}"
        )));
    }
    let time_gain = gain(samples);
    Ok(SnappedTimeGain {
        time_gain,
        samples_per_period: samples as usize,
        snap_error: time_gain - requested,
    })
}
