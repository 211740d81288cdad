//! Discontinuous non-linear blocks injected into the simulated loops.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Where a block acts in the loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockSite {
    /// Between controller and plant.
    Actuator,
    /// Between plant output and controller.
    Sensor,
    /// Adds a force or torque term computed from the plant velocity.
    Friction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonlinearBlock {
    ActuatorSaturation {
        lo: f64,
        hi: f64,
    },
    SensorSaturation {
        lo: f64,
        hi: f64,
    },
    /// Rounds the measurement to the nearest multiple of `step`.
    Quantizer {
        step: f64,
    },
    DeadZone {
        half_width: f64,
    },
    Backlash {
        play: f64,
    },
    CoulombFriction {
        level: f64,
    },
    /// `-coef * v * |v|`. Its linear counterpart is `-coef * nominal_speed * v`,
    /// which agrees with it at `|v| = nominal_speed`.
    QuadraticFriction {
        coef: f64,
        #[serde(default = "default_nominal_speed")]
        nominal_speed: f64,
    },
    /// Averaged pulse-width modulation: the actuation is clamped to
    /// `±full_scale` and its duty cycle quantized to `levels` steps.
    DutyCycle {
        full_scale: f64,
        levels: u32,
    },
}

fn default_nominal_speed() -> f64 {
    1.0
}

/// Mutable state of a block; only backlash carries any.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BlockState {
    held: Option<f64>,
}

/// Result of one block evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockOutput {
    pub value: f64,
    /// A saturation block clamped its input.
    pub saturated: bool,
    /// `|value - linear counterpart|` for injected non-linearities, else 0.
    pub deviation: f64,
}

impl NonlinearBlock {
    pub fn site(&self) -> BlockSite {
        match self {
            NonlinearBlock::ActuatorSaturation { .. }
            | NonlinearBlock::DeadZone { .. }
            | NonlinearBlock::Backlash { .. }
            | NonlinearBlock::DutyCycle { .. } => BlockSite::Actuator,
            NonlinearBlock::SensorSaturation { .. } | NonlinearBlock::Quantizer { .. } => {
                BlockSite::Sensor
            }
            NonlinearBlock::CoulombFriction { .. } | NonlinearBlock::QuadraticFriction { .. } => {
                BlockSite::Friction
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidBlock(msg));
        let finite_nonneg = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                bad(format!("{name} must be finite and >= 0, got {v}"))
            }
        };
        match *self {
            NonlinearBlock::ActuatorSaturation { lo, hi }
            | NonlinearBlock::SensorSaturation { lo, hi } => {
                if lo.is_finite() && hi.is_finite() && lo < hi {
                    Ok(())
                } else {
                    bad(format!("saturation needs lo < hi, got [{lo}, {hi}]"))
                }
            }
            NonlinearBlock::Quantizer { step } => {
                if step.is_finite() && step > 0.0 {
                    Ok(())
                } else {
                    bad(format!("quantizer step must be > 0, got {step}"))
                }
            }
            NonlinearBlock::DeadZone { half_width } => finite_nonneg("half_width", half_width),
            NonlinearBlock::Backlash { play } => finite_nonneg("play", play),
            NonlinearBlock::CoulombFriction { level } => finite_nonneg("level", level),
            NonlinearBlock::QuadraticFriction {
                coef,
                nominal_speed,
            } => {
                finite_nonneg("coef", coef)?;
                finite_nonneg("nominal_speed", nominal_speed)
            }
            NonlinearBlock::DutyCycle { full_scale, levels } => {
                if !(full_scale.is_finite() && full_scale > 0.0) {
                    bad(format!("full_scale must be > 0, got {full_scale}"))
                } else if levels == 0 {
                    bad("duty cycle needs at least one level".into())
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Evaluates the block. For friction blocks `input` is the velocity and
    /// the value is the resulting force term.
    pub fn apply(&self, input: f64, state: &mut BlockState) -> Result<BlockOutput> {
        if !input.is_finite() {
            return Err(Error::NonFiniteInput);
        }
        let plain = |value: f64| BlockOutput {
            value,
            saturated: false,
            deviation: 0.0,
        };
        let out = match *self {
            NonlinearBlock::ActuatorSaturation { lo, hi }
            | NonlinearBlock::SensorSaturation { lo, hi } => BlockOutput {
                value: input.clamp(lo, hi),
                saturated: input < lo || input > hi,
                deviation: 0.0,
            },
            NonlinearBlock::Quantizer { step } => plain((input / step).round() * step),
            NonlinearBlock::DeadZone { half_width } => {
                let value = if input > half_width {
                    input - half_width
                } else if input < -half_width {
                    input + half_width
                } else {
                    0.0
                };
                BlockOutput {
                    value,
                    saturated: false,
                    deviation: (value - input).abs(),
                }
            }
            NonlinearBlock::Backlash { play } => {
                let half = play / 2.0;
                let held = state.held.unwrap_or(0.0);
                let value = if input > held + half {
                    input - half
                } else if input < held - half {
                    input + half
                } else {
                    held
                };
                state.held = Some(value);
                BlockOutput {
                    value,
                    saturated: false,
                    deviation: (value - input).abs(),
                }
            }
            NonlinearBlock::CoulombFriction { level } => {
                let sign = if input > 0.0 {
                    1.0
                } else if input < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                let value = -level * sign;
                BlockOutput {
                    value,
                    saturated: false,
                    deviation: value.abs(),
                }
            }
            NonlinearBlock::QuadraticFriction {
                coef,
                nominal_speed,
            } => {
                let value = -coef * input * input.abs();
                let linear = -coef * nominal_speed * input;
                BlockOutput {
                    value,
                    saturated: false,
                    deviation: (value - linear).abs(),
                }
            }
            NonlinearBlock::DutyCycle { full_scale, levels } => {
                let levels = f64::from(levels);
                let duty = (input.clamp(-full_scale, full_scale) / full_scale * levels).round() / levels;
                plain(duty * full_scale)
            }
        };
        Ok(out)
    }
}

/// Functional form of [`NonlinearBlock::apply`].
pub fn apply_block(
    block: &NonlinearBlock,
    input: f64,
    state: BlockState,
) -> Result<(f64, BlockState)> {
    let mut state = state;
    let out = block.apply(input, &mut state)?;
    Ok((out.value, state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn run(block: NonlinearBlock, input: f64) -> BlockOutput {
        block.apply(input, &mut BlockState::default()).unwrap()
    }

    #[test]
    fn saturation_clamps_thrust() {
        let out = run(NonlinearBlock::ActuatorSaturation { lo: -2.0, hi: 2.0 }, 3.1);
        assert_eq!(out.value, 2.0);
        assert!(out.saturated);
        let inside = run(NonlinearBlock::ActuatorSaturation { lo: -2.0, hi: 2.0 }, 2.0);
        assert!(!inside.saturated);
    }

    #[test]
    fn quantizer_and_dead_zone() {
        assert_eq!(run(NonlinearBlock::Quantizer { step: 0.1 }, 0.2499).value, 0.2);
        assert_eq!(run(NonlinearBlock::DeadZone { half_width: 0.5 }, 0.3).value, 0.0);
        assert_eq!(run(NonlinearBlock::DeadZone { half_width: 0.5 }, -0.75).value, -0.25);
    }

    #[test]
    fn backlash_hysteresis() {
        let block = NonlinearBlock::Backlash { play: 0.2 };
        let (out, state) = apply_block(&block, 0.3, BlockState::default()).unwrap();
        assert!((out - 0.2).abs() < 1e-15);
        let (out, state) = apply_block(&block, 0.25, state).unwrap();
        assert!((out - 0.2).abs() < 1e-15);
        let (out, _) = apply_block(&block, 0.05, state).unwrap();
        assert!((out - 0.15).abs() < 1e-15);
    }

    #[test]
    fn friction_terms() {
        assert_eq!(run(NonlinearBlock::CoulombFriction { level: 0.3 }, 2.0).value, -0.3);
        assert_eq!(run(NonlinearBlock::CoulombFriction { level: 0.3 }, 0.0).value, 0.0);
        let q = run(
            NonlinearBlock::QuadraticFriction {
                coef: 0.5,
                nominal_speed: 1.0,
            },
            -2.0,
        );
        assert_eq!(q.value, 2.0);
        assert_eq!(q.deviation, 1.0);
        let at_nominal = run(
            NonlinearBlock::QuadraticFriction {
                coef: 0.5,
                nominal_speed: 2.0,
            },
            2.0,
        );
        assert_eq!(at_nominal.deviation, 0.0);
    }

    #[test]
    fn duty_cycle_quantizes_actuation() {
        let block = NonlinearBlock::DutyCycle {
            full_scale: 10.0,
            levels: 100,
        };
        assert!((run(block, 3.14159).value - 3.1).abs() < 1e-12);
        assert_eq!(run(block, 25.0).value, 10.0);
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let err = NonlinearBlock::Quantizer { step: 0.1 }
            .apply(f64::NAN, &mut BlockState::default())
            .unwrap_err();
        assert_eq!(err, Error::NonFiniteInput);
    }

    #[test]
    fn invalid_parameters() {
        assert!(NonlinearBlock::ActuatorSaturation { lo: 1.0, hi: 1.0 }.validate().is_err());
        assert!(NonlinearBlock::Quantizer { step: 0.0 }.validate().is_err());
        assert!(NonlinearBlock::DeadZone { half_width: -0.1 }.validate().is_err());
        assert!(NonlinearBlock::Backlash { play: 0.0 }.validate().is_ok());
    }

    proptest! {
        #[test]
        fn quantizer_error_is_bounded(x in -100.0f64..100.0, step in 0.001f64..5.0) {
            let q = run(NonlinearBlock::Quantizer { step }, x).value;
            prop_assert!((q - x).abs() <= step / 2.0 + 1e-12 * x.abs().max(1.0));
        }

        #[test]
        fn backlash_follows_monotone_input(
            play in 0.0f64..1.0,
            steps in proptest::collection::vec(0.0f64..0.3, 1..100),
        ) {
            let block = NonlinearBlock::Backlash { play };
            let mut state = BlockState::default();
            let mut input = 0.0;
            let mut last = f64::MIN;
            for s in steps {
                input += s;
                let out = block.apply(input, &mut state).unwrap().value;
                prop_assert!(out >= last);
                last = out;
            }
        }
    }
}
