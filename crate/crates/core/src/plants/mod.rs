//! Fixed-step closed-loop simulators.
//!
//! Each step runs the sensor blocks on the plant output, the controller on
//! reference and measurement, the actuator blocks on the command, and one
//! semi-implicit Euler step of the physics (velocity first, then position).
//! Plants start at rest. Runs are pure functions of `(spec, reference)`.

mod blocks;

pub use blocks::{apply_block, BlockOutput, BlockSite, BlockState, NonlinearBlock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signals::{TimeSeries, Trace, DEFAULT_SAMPLE_INTERVAL};

/// Outputs beyond this multiple of the largest reference magnitude abort a run.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

/// Physics and controller of the simulated loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlantModel {
    /// Vertical position of a mass driven by a force, without gravity, under
    /// PID control with the derivative taken on the measurement.
    DroneAlt {
        /// kg
        mass: f64,
        kp: f64,
        ki: f64,
        kd: f64,
    },
    /// Motor angle driven by a voltage, with inertia and viscous damping,
    /// under state feedback on position and velocity plus integral action.
    DcServo {
        /// kg m^2
        inertia: f64,
        /// N m s
        damping: f64,
        /// N m / V
        torque_constant: f64,
        k_position: f64,
        k_velocity: f64,
        k_integral: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantSpec {
    pub model: PlantModel,
    #[serde(default)]
    pub blocks: Vec<NonlinearBlock>,
    #[serde(default = "default_sample_interval")]
    pub sample_interval: f64,
}

fn default_sample_interval() -> f64 {
    DEFAULT_SAMPLE_INTERVAL
}

impl PlantSpec {
    /// Minimal drone altitude loop: 0.4 kg, thrust limited to ±2 N, closed-loop
    /// bandwidth close to 0.9 Hz.
    pub fn minimal_drone() -> Self {
        PlantSpec {
            model: PlantModel::DroneAlt {
                mass: 0.4,
                kp: 10.4,
                ki: 2.0,
                kd: 3.2,
            },
            blocks: vec![NonlinearBlock::ActuatorSaturation { lo: -2.0, hi: 2.0 }],
            sample_interval: DEFAULT_SAMPLE_INTERVAL,
        }
    }

    /// DC servo with actuator and sensor saturation, encoder quantization and
    /// averaged PWM, before any injected non-linearity.
    pub fn dc_servo() -> Self {
        PlantSpec {
            model: PlantModel::DcServo {
                inertia: 0.005,
                damping: 0.01,
                torque_constant: 0.1,
                k_position: 1.1,
                k_velocity: 0.3,
                k_integral: 1.0,
            },
            blocks: vec![
                NonlinearBlock::ActuatorSaturation { lo: -5.0, hi: 5.0 },
                NonlinearBlock::DutyCycle {
                    full_scale: 5.0,
                    levels: 256,
                },
                NonlinearBlock::SensorSaturation {
                    lo: -2.0 * std::f64::consts::PI,
                    hi: 2.0 * std::f64::consts::PI,
                },
                NonlinearBlock::Quantizer {
                    step: 2.0 * std::f64::consts::PI / 4096.0,
                },
            ],
            sample_interval: DEFAULT_SAMPLE_INTERVAL,
        }
    }

    pub fn without_blocks(&self) -> Self {
        PlantSpec {
            blocks: Vec::new(),
            ..self.clone()
        }
    }

    pub fn with_block(mut self, block: NonlinearBlock) -> Self {
        self.blocks.push(block);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidPlant(format!("{name} must be > 0, got {v}")))
            }
        };
        let non_negative = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidPlant(format!("{name} must be >= 0, got {v}")))
            }
        };
        positive("sample_interval", self.sample_interval)?;
        match self.model {
            PlantModel::DroneAlt { mass, kp, ki, kd } => {
                positive("mass", mass)?;
                positive("kp", kp)?;
                non_negative("ki", ki)?;
                non_negative("kd", kd)?;
            }
            PlantModel::DcServo {
                inertia,
                damping,
                torque_constant,
                k_position,
                k_velocity,
                k_integral,
            } => {
                positive("inertia", inertia)?;
                non_negative("damping", damping)?;
                positive("torque_constant", torque_constant)?;
                positive("k_position", k_position)?;
                non_negative("k_velocity", k_velocity)?;
                non_negative("k_integral", k_integral)?;
            }
        }
        for block in &self.blocks {
            block.validate()?;
        }
        Ok(())
    }
}

/// Per-step instrumentation of a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InstrumentationLog {
    pub actuator_saturated: Vec<bool>,
    pub sensor_saturated: Vec<bool>,
    /// Summed `|block value - linear counterpart|` of the injected blocks.
    pub nonlinearity_deviation: Vec<f64>,
    /// Controller output before the actuator blocks.
    pub command: Vec<f64>,
    /// Actuation after the actuator blocks.
    pub actuation: Vec<f64>,
}

impl InstrumentationLog {
    fn with_capacity(n: usize) -> Self {
        InstrumentationLog {
            actuator_saturated: Vec::with_capacity(n),
            sensor_saturated: Vec::with_capacity(n),
            nonlinearity_deviation: Vec::with_capacity(n),
            command: Vec::with_capacity(n),
            actuation: Vec::with_capacity(n),
        }
    }

    pub fn len(&self) -> usize {
        self.actuation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actuation.is_empty()
    }

    /// Keeps the first `len` steps.
    pub fn truncate(&mut self, len: usize) {
        self.actuator_saturated.truncate(len);
        self.sensor_saturated.truncate(len);
        self.nonlinearity_deviation.truncate(len);
        self.command.truncate(len);
        self.actuation.truncate(len);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SaturationSite {
    Actuator,
    Sensor,
}

/// Fraction of steps flagged as saturated at `which`.
pub fn saturation_time_fraction(log: &InstrumentationLog, which: SaturationSite) -> f64 {
    let flags = match which {
        SaturationSite::Actuator => &log.actuator_saturated,
        SaturationSite::Sensor => &log.sensor_saturated,
    };
    if flags.is_empty() {
        return 0.0;
    }
    flags.iter().filter(|&&f| f).count() as f64 / flags.len() as f64
}

pub fn nonlinearity_deviation_mean(log: &InstrumentationLog) -> f64 {
    let devs = &log.nonlinearity_deviation;
    if devs.is_empty() {
        return 0.0;
    }
    devs.iter().sum::<f64>() / devs.len() as f64
}

/// Blocks of one site with their states, applied in declaration order.
struct Chain {
    blocks: Vec<(NonlinearBlock, BlockState)>,
}

impl Chain {
    fn new(spec: &PlantSpec, site: BlockSite) -> Self {
        Chain {
            blocks: spec
                .blocks
                .iter()
                .filter(|b| b.site() == site)
                .map(|b| (*b, BlockState::default()))
                .collect(),
        }
    }

    /// Passes `input` through the chain (friction blocks sum instead).
    fn run(&mut self, input: f64, summed: bool) -> Result<ChainOutput> {
        let mut out = ChainOutput {
            value: if summed { 0.0 } else { input },
            saturated: false,
            deviation: 0.0,
        };
        for (block, state) in &mut self.blocks {
            let step_in = if summed { input } else { out.value };
            let o = block.apply(step_in, state)?;
            out.value = if summed { out.value + o.value } else { o.value };
            out.saturated |= o.saturated;
            out.deviation += o.deviation;
        }
        Ok(out)
    }
}

struct ChainOutput {
    value: f64,
    saturated: bool,
    deviation: f64,
}

/// Simulates the closed loop over `reference`.
///
/// Fails with [`Error::Diverged`] when the output leaves
/// `±DIVERGENCE_FACTOR * max|reference|` or stops being finite.
pub fn run_plant(spec: &PlantSpec, reference: &TimeSeries) -> Result<(Trace, InstrumentationLog)> {
    spec.validate()?;
    if reference.sample_interval() != spec.sample_interval {
        return Err(Error::InvalidPlant(format!(
            "reference sampled at {} s, plant at {} s",
            reference.sample_interval(),
            spec.sample_interval
        )));
    }
    let dt = spec.sample_interval;
    let n = reference.len();
    let scale = reference.samples().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let limit = DIVERGENCE_FACTOR * if scale > 0.0 { scale } else { 1.0 };

    let mut sensor = Chain::new(spec, BlockSite::Sensor);
    let mut actuator = Chain::new(spec, BlockSite::Actuator);
    let mut friction = Chain::new(spec, BlockSite::Friction);

    let mut output = Vec::with_capacity(n);
    let mut log = InstrumentationLog::with_capacity(n);

    // position, velocity, integral of the error, previous measurement
    let (mut x, mut v, mut integral, mut prev_meas) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);

    for (step, &r) in reference.samples().iter().enumerate() {
        let meas = sensor.run(x, false)?;
        let error = r - meas.value;
        let command = match spec.model {
            PlantModel::DroneAlt { kp, ki, kd, .. } => {
                integral += ki * error * dt;
                let derivative = -kd * (meas.value - prev_meas) / dt;
                kp * error + integral + derivative
            }
            PlantModel::DcServo {
                k_position,
                k_velocity,
                k_integral,
                ..
            } => {
                integral += k_integral * error * dt;
                k_position * error - k_velocity * v + integral
            }
        };
        prev_meas = meas.value;
        let act = actuator.run(command, false)?;
        let fric = friction.run(v, true)?;

        let accel = match spec.model {
            PlantModel::DroneAlt { mass, .. } => (act.value + fric.value) / mass,
            PlantModel::DcServo {
                inertia,
                damping,
                torque_constant,
                ..
            } => (torque_constant * act.value - damping * v + fric.value) / inertia,
        };
        v += dt * accel;
        x += dt * v;

        if !x.is_finite() || x.abs() > limit {
            return Err(Error::Diverged { step });
        }
        output.push(x);
        log.actuator_saturated.push(act.saturated);
        log.sensor_saturated.push(meas.saturated);
        log.nonlinearity_deviation.push(act.deviation + fric.deviation + meas.deviation);
        log.command.push(command);
        log.actuation.push(act.value);
    }

    let trace = Trace::new(reference.clone(), TimeSeries::new(output, dt)?)?;
    Ok((trace, log))
}
