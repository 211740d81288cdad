use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{GeneratedTest, RequiredInput, TestSet};
use crate::error::{Error, Result};
use crate::plants::{
    nonlinearity_deviation_mean, run_plant, saturation_time_fraction, PlantSpec, SaturationSite,
};
use crate::signals::{render_reference, TestCase};
use crate::spectral::{dft_amplitude, Component, DofPoint, TraceSpectra};

/// Observations of one executed test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub id: usize,
    pub case: TestCase,
    pub target_frequency: f64,
    /// Largest non-zero-frequency component of the reference.
    pub main: Component,
    /// `+inf` when the run diverged.
    #[serde(with = "extended_float")]
    pub dnl: f64,
    /// Degree of filtering per relevant component; empty unless the test is
    /// linear (dnl below the threshold).
    pub dof: Vec<DofPoint>,
    pub actuator_saturation: f64,
    pub sensor_saturation: f64,
    pub nonlinearity_deviation: f64,
    /// Step at which the run diverged.
    pub diverged_at: Option<usize>,
}

impl TestResult {
    pub fn diverged(&self) -> bool {
        self.diverged_at.is_some()
    }

    pub fn is_linear(&self, dnl_threshold: f64) -> bool {
        self.dnl < dnl_threshold
    }
}

/// Executes one test against the plant.
pub fn run_test(plant: &PlantSpec, test: &GeneratedTest, input: &RequiredInput) -> Result<TestResult> {
    let reference = render_reference(&test.case)?;
    let main = dft_amplitude(&reference)?
        .main_component()
        .ok_or(Error::DegenerateSpectrum("reference has no non-zero frequency"))?;
    let mut result = TestResult {
        id: test.id,
        case: test.case,
        target_frequency: test.target_frequency,
        main,
        dnl: f64::INFINITY,
        dof: Vec::new(),
        actuator_saturation: 0.0,
        sensor_saturation: 0.0,
        nonlinearity_deviation: 0.0,
        diverged_at: None,
    };
    match run_plant(plant, &reference) {
        Ok((trace, log)) => {
            let spectra = TraceSpectra::new(&trace, input.rho)?;
            result.dnl = spectra.degree_of_nonlinearity(input.dnl_normalization)?;
            if result.is_linear(input.dnl_threshold) {
                result.dof = spectra.dof_profile();
            }
            result.actuator_saturation = saturation_time_fraction(&log, SaturationSite::Actuator);
            result.sensor_saturation = saturation_time_fraction(&log, SaturationSite::Sensor);
            result.nonlinearity_deviation = nonlinearity_deviation_mean(&log);
        }
        Err(Error::Diverged { step }) => result.diverged_at = Some(step),
        Err(e) => return Err(e),
    }
    Ok(result)
}

/// Runs every test on a pool of `workers` threads. Results keep test order.
pub fn execute_campaign(
    plant: &PlantSpec,
    tests: &TestSet,
    input: &RequiredInput,
    workers: usize,
) -> Result<Vec<TestResult>> {
    input.validate()?;
    plant.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidInput(format!("worker pool: {e}")))?;
    pool.install(|| {
        tests
            .tests
            .par_iter()
            .map(|t| run_test(plant, t, input))
            .collect()
    })
}

/// Writes non-finite floats as the strings `"inf"`, `"-inf"` and `"nan"`.
pub mod extended_float {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("not a number: {other}"))),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::campaign::drone_input;
    use crate::plants::PlantModel;
    use crate::signals::ShapeKind;

    fn test(id: usize, shape: ShapeKind, amp: f64, period: f64) -> GeneratedTest {
        GeneratedTest {
            id,
            case: TestCase {
                shape,
                amp_gain: amp,
                time_gain: 1.0 / period,
                periods: 3,
                sample_interval: 0.001,
            },
            target_frequency: 1.0 / period,
            bound: 6.0,
            snap_error: 0.0,
        }
    }

    #[test]
    fn empty_set_gives_no_results() {
        let out = execute_campaign(&PlantSpec::minimal_drone(), &TestSet::default(), &drone_input(), 2)
            .unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn linear_test_has_dof() {
        let r = run_test(
            &PlantSpec::minimal_drone(),
            &test(0, ShapeKind::Sine, 0.5, 10.0),
            &drone_input(),
        )
        .unwrap();
        assert!(r.dnl < 0.05, "{}", r.dnl);
        assert!(!r.dof.is_empty());
        assert!((r.main.frequency - 0.1).abs() < 1e-12);
        assert!(!r.diverged());
    }

    #[test]
    fn nonlinear_test_has_no_dof() {
        let r = run_test(
            &PlantSpec::minimal_drone(),
            &test(0, ShapeKind::Square, 3.5, 5.0),
            &drone_input(),
        )
        .unwrap();
        assert!(r.dnl >= 0.15);
        assert!(r.dof.is_empty());
        assert!(r.actuator_saturation > 0.0);
    }

    #[test]
    fn divergence_is_flagged() {
        let unstable = PlantSpec {
            model: PlantModel::DroneAlt {
                mass: 1e-6,
                kp: 1e3,
                ki: 1e6,
                kd: 0.0,
            },
            blocks: vec![],
            sample_interval: 0.001,
        };
        let r = run_test(&unstable, &test(3, ShapeKind::Square, 1.0, 1.0), &drone_input()).unwrap();
        assert!(r.diverged());
        assert_eq!(r.dnl, f64::INFINITY);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"dnl\":\"inf\""));
        let back: TestResult = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn order_is_independent_of_workers() {
        let set = TestSet {
            tests: (0..12)
                .map(|i| test(i, ShapeKind::ALL[i % 5], 0.3 + 0.4 * i as f64, 1.0 + i as f64 * 0.5))
                .collect(),
        };
        let one = execute_campaign(&PlantSpec::minimal_drone(), &set, &drone_input(), 1).unwrap();
        let four = execute_campaign(&PlantSpec::minimal_drone(), &set, &drone_input(), 4).unwrap();
        assert_eq!(one, four);
        assert!(one.iter().enumerate().all(|(i, r)| r.id == i));
    }
}
