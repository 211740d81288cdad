use serde::{Deserialize, Serialize};

use super::RequiredInput;
use crate::error::{Error, Result};
use crate::plants::{run_plant, PlantSpec};
use crate::signals::{render_reference, shape_fundamental_ratio, snap_time_gain, ShapeKind, TestCase};
use crate::spectral::TraceSpectra;

pub const DEFAULT_MAX_PERIODS: u32 = 10;

/// Degree of non-linearity of the stress test per number of periods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub shape: ShapeKind,
    pub amplitude: f64,
    pub time_gain: f64,
    /// Entry `k - 1` is computed on the first `k` periods.
    #[serde(with = "extended_float_vec")]
    pub dnl_per_periods: Vec<f64>,
    /// Smallest `k` whose dnl exceeds the threshold.
    pub first_exceeded: Option<u32>,
    pub chosen_periods: u32,
}

impl Calibration {
    /// The stress test never exceeded the threshold.
    pub fn is_warning(&self) -> bool {
        self.first_exceeded.is_none()
    }
}

/// Runs the most stressful test (`a_max` at `f_max`) for `max_periods`
/// periods and picks one period more than the first prefix whose dnl
/// exceeds the threshold, capped at `max_periods`.
pub fn choose_num_periods(
    plant: &PlantSpec,
    input: &RequiredInput,
    shape: ShapeKind,
    max_periods: u32,
) -> Result<Calibration> {
    input.validate()?;
    if max_periods < 2 {
        return Err(Error::InvalidInput("max_periods must be >= 2".into()));
    }
    let ratio = shape_fundamental_ratio(shape);
    let snapped = snap_time_gain(
        input.f_max / ratio,
        input.sample_interval,
        Some((input.f_min / ratio, input.f_max / ratio)),
    )?;
    let case = TestCase {
        shape,
        amp_gain: input.a_max,
        time_gain: snapped.time_gain,
        periods: max_periods,
        sample_interval: input.sample_interval,
    };
    let reference = render_reference(&case)?;
    let spp = snapped.samples_per_period;

    // Runs are causal, so a diverged run is replayed on the periods that
    // completed before the divergence.
    let (trace, complete) = match run_plant(plant, &reference) {
        Ok((trace, _)) => (Some(trace), max_periods as usize),
        Err(Error::Diverged { step }) => {
            let complete = step / spp;
            let trace = if complete > 0 {
                Some(run_plant(plant, &reference.prefix(complete * spp)?)?.0)
            } else {
                None
            };
            (trace, complete)
        }
        Err(e) => return Err(e),
    };

    let mut dnl_per_periods = Vec::with_capacity(max_periods as usize);
    for k in 1..=max_periods as usize {
        let dnl = match &trace {
            Some(trace) if k <= complete => TraceSpectra::new(&trace.prefix(k * spp)?, input.rho)?
                .degree_of_nonlinearity(input.dnl_normalization)?,
            _ => f64::INFINITY,
        };
        dnl_per_periods.push(dnl);
    }
    let first_exceeded = dnl_per_periods
        .iter()
        .position(|&d| d > input.dnl_threshold)
        .map(|i| i as u32 + 1);
    let chosen_periods = match first_exceeded {
        Some(k) => (k + 1).min(max_periods),
        None => {
            log::warn!(
                "stress test never exceeded dnl threshold {} in {max_periods} periods",
                input.dnl_threshold
            );
            max_periods
        }
    };
    Ok(Calibration {
        shape,
        amplitude: input.a_max,
        time_gain: snapped.time_gain,
        dnl_per_periods,
        first_exceeded,
        chosen_periods,
    })
}

mod extended_float_vec {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(transparent)]
    struct Wrapped(#[serde(with = "crate::campaign::execute::extended_float")] f64);

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|&x| Wrapped(x)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Ok(Vec::<Wrapped>::deserialize(d)?.into_iter().map(|w| w.0).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::campaign::drone_input;
    use crate::plants::PlantModel;

    #[test]
    fn drone_crosses_early() {
        let cal = choose_num_periods(&PlantSpec::minimal_drone(), &drone_input(), ShapeKind::Sine, 10)
            .unwrap();
        assert_eq!(cal.dnl_per_periods.len(), 10);
        assert!(cal.dnl_per_periods[0] < 0.15);
        let k = cal.first_exceeded.unwrap();
        assert!(k <= 4);
        assert_eq!(cal.chosen_periods, k + 1);
    }

    #[test]
    fn linear_plant_warns() {
        // linear loop with a bandwidth near 20 Hz: start-up transients die
        // out within a fraction of the first period
        let spec = PlantSpec {
            model: PlantModel::DroneAlt {
                mass: 0.4,
                kp: 6300.0,
                ki: 0.0,
                kd: 70.0,
            },
            blocks: vec![],
            sample_interval: 0.001,
        };
        let cal = choose_num_periods(&spec, &drone_input(), ShapeKind::Sine, 6).unwrap();
        assert!(cal.is_warning());
        assert_eq!(cal.chosen_periods, 6);
    }

    #[test]
    fn rerun_is_identical() {
        let a = choose_num_periods(&PlantSpec::dc_servo(), &drone_input(), ShapeKind::Square, 4).unwrap();
        let b = choose_num_periods(&PlantSpec::dc_servo(), &drone_input(), ShapeKind::Square, 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn infinite_entries_round_trip() {
        let cal = Calibration {
            shape: ShapeKind::Sine,
            amplitude: 1.0,
            time_gain: 2.0,
            dnl_per_periods: vec![0.1, f64::INFINITY],
            first_exceeded: Some(2),
            chosen_periods: 3,
        };
        let json = serde_json::to_string(&cal).unwrap();
        assert!(json.contains("[0.1,\"inf\"]"));
        assert_eq!(serde_json::from_str::<Calibration>(&json).unwrap(), cal);
    }

    #[test]
    fn max_periods_too_small() {
        assert!(choose_num_periods(&PlantSpec::minimal_drone(), &drone_input(), ShapeKind::Sine, 1).is_err());
    }
}
