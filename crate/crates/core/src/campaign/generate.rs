use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Beta;
use serde::{Deserialize, Serialize};

use super::{AmplitudeBoundMap, RequiredInput};
use crate::error::{Error, Result};
use crate::signals::{shape_fundamental_ratio, snap_time_gain, ShapeKind, TestCase};

/// Mean spacing of the sampled bound frequencies.
pub fn derive_frequency_resolution(bounds: &AmplitudeBoundMap) -> Result<f64> {
    let freqs: Vec<f64> = bounds.frequencies().collect();
    if freqs.len() < 2 {
        return Err(Error::InsufficientData(
            "frequency resolution needs at least two bound entries".into(),
        ));
    }
    let gaps: f64 = freqs.windows(2).map(|w| w[1] - w[0]).sum();
    Ok(gaps / (freqs.len() - 1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingOptions {
    pub beta_alpha: f64,
    pub beta_beta: f64,
    /// Overrides the resolution derived from the bound map.
    pub frequency_resolution: Option<f64>,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        SamplingOptions {
            beta_alpha: 2.0,
            beta_beta: 1.0,
            frequency_resolution: None,
        }
    }
}

/// A generated test case with the values it was derived from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratedTest {
    pub id: usize,
    pub case: TestCase,
    /// Requested main-component frequency, Hz.
    pub target_frequency: f64,
    /// Interpolated amplitude bound at the target frequency.
    pub bound: f64,
    /// `case.time_gain` minus the requested time gain.
    pub snap_error: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TestSet {
    pub tests: Vec<GeneratedTest>,
}

impl TestSet {
    pub fn len(&self) -> usize {
        self.tests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tests.is_empty()
    }
}

/// Uniform frequency grid of spacing `step` from `f_min`, up to `f_max`.
fn frequency_grid(f_min: f64, f_max: f64, step: f64) -> Vec<f64> {
    let count = ((f_max - f_min) / step + 1e-9).floor() as usize + 1;
    (0..count).map(|i| (f_min + i as f64 * step).min(f_max)).collect()
}

/// Draws `ceil(bound(f) / delta_a)` amplitudes per shape and grid frequency
/// from a Beta distribution scaled to the interpolated bound.
///
/// Shapes are visited in the given order, frequencies in ascending order.
/// The generator is seeded from `input.seed`.
pub fn generate_test_set(
    bounds: &AmplitudeBoundMap,
    shapes: &[ShapeKind],
    input: &RequiredInput,
    options: &SamplingOptions,
) -> Result<TestSet> {
    input.validate()?;
    if shapes.is_empty() {
        return Err(Error::InvalidInput("at least one shape is required".into()));
    }
    let beta = Beta::new(options.beta_alpha, options.beta_beta)
        .map_err(|e| Error::InvalidInput(format!("beta parameters: {e}")))?;
    let step = match options.frequency_resolution {
        Some(step) => step,
        None => derive_frequency_resolution(bounds)?,
    };
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidInput(format!("frequency resolution must be > 0, got {step}")));
    }
    let grid = frequency_grid(input.f_min, input.f_max, step);

    let mut rng = ChaCha8Rng::seed_from_u64(input.seed);
    let mut tests = Vec::new();
    for &shape in shapes {
        let ratio = shape_fundamental_ratio(shape);
        for &f in &grid {
            let requested = f / ratio;
            let snapped = snap_time_gain(
                requested,
                input.sample_interval,
                Some((input.f_min / ratio, input.f_max / ratio)),
            )?;
            let bound = bounds.interpolate(f)?;
            if bound <= 0.0 {
                continue;
            }
            let n = (bound / input.delta_a).ceil().max(1.0) as usize;
            for _ in 0..n {
                let mut u: f64 = rng.sample(beta);
                while u <= 0.0 {
                    u = rng.sample(beta);
                }
                let case = TestCase {
                    shape,
                    amp_gain: u * bound,
                    time_gain: snapped.time_gain,
                    periods: input.base_periods,
                    sample_interval: input.sample_interval,
                };
                case.validate()?;
                tests.push(GeneratedTest {
                    id: tests.len(),
                    case,
                    target_frequency: f,
                    bound,
                    snap_error: snapped.time_gain - requested,
                });
            }
        }
    }
    Ok(TestSet { tests })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::campaign::{drone_input, BoundEntry};
    use proptest::prelude::*;

    fn map(entries: &[(f64, f64)]) -> AmplitudeBoundMap {
        AmplitudeBoundMap::from_entries(
            entries
                .iter()
                .map(|&(frequency, bound)| BoundEntry { frequency, bound })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn resolution_is_the_mean_gap() {
        assert!((derive_frequency_resolution(&map(&[(0.1, 1.0), (2.0, 1.0)])).unwrap() - 1.9).abs() < 1e-15);
        let r = derive_frequency_resolution(&map(&[(0.1, 1.0), (0.5, 1.0), (1.0, 1.0), (2.0, 1.0)]))
            .unwrap();
        assert!((r - 0.633_333_333_333_333_3).abs() < 1e-12);
        assert!(derive_frequency_resolution(&map(&[(0.1, 1.0)])).is_err());
    }

    #[test]
    fn count_follows_bound_over_resolution() {
        let input = RequiredInput {
            delta_a: 0.25,
            ..drone_input()
        };
        let bounds = map(&[(0.1, 1.0), (2.0, 1.0)]);
        let set = generate_test_set(&bounds, &[ShapeKind::Square], &input, &SamplingOptions::default())
            .unwrap();
        // grid {0.1, 2.0}, four amplitudes each
        assert_eq!(set.len(), 8);
        for t in &set.tests {
            assert!(t.case.amp_gain > 0.0 && t.case.amp_gain <= 1.0);
            assert_eq!(t.case.periods, input.base_periods);
        }
    }

    #[test]
    fn same_seed_same_set() {
        let input = drone_input();
        let bounds = map(&[(0.1, 5.0), (0.7, 2.0), (2.0, 0.5)]);
        let shapes = [ShapeKind::Square, ShapeKind::Triangle];
        let a = generate_test_set(&bounds, &shapes, &input, &SamplingOptions::default()).unwrap();
        let b = generate_test_set(&bounds, &shapes, &input, &SamplingOptions::default()).unwrap();
        assert_eq!(a, b);
        let c = generate_test_set(
            &bounds,
            &shapes,
            &RequiredInput { seed: 8, ..input },
            &SamplingOptions::default(),
        )
        .unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn amplitudes_skew_high() {
        let input = RequiredInput {
            delta_a: 0.001,
            ..drone_input()
        };
        let bounds = map(&[(0.1, 1.0), (2.0, 1.0)]);
        let set = generate_test_set(&bounds, &[ShapeKind::Sine], &input, &SamplingOptions::default())
            .unwrap();
        let mean = set.tests.iter().map(|t| t.case.amp_gain).sum::<f64>() / set.len() as f64;
        // Beta(2, 1) has mean 2/3
        assert!((mean - 2.0 / 3.0).abs() < 0.02, "{mean}");
    }

    #[test]
    fn empty_shapes_rejected() {
        let bounds = map(&[(0.1, 1.0), (2.0, 1.0)]);
        assert!(generate_test_set(&bounds, &[], &drone_input(), &SamplingOptions::default()).is_err());
    }

    proptest! {
        #[test]
        fn generated_cases_are_admissible(
            b0 in 0.1f64..6.0,
            b1 in 0.1f64..6.0,
            b2 in 0.1f64..6.0,
            mid in 0.2f64..1.9,
            seed in any::<u64>(),
        ) {
            let input = RequiredInput { delta_a: 0.5, seed, ..drone_input() };
            let bounds = map(&[(0.1, b0), (mid, b1), (2.0, b2)]);
            let set = generate_test_set(&bounds, &ShapeKind::ALL, &input, &SamplingOptions::default()).unwrap();
            for t in &set.tests {
                prop_assert!(t.case.validate().is_ok());
                prop_assert!(t.case.amp_gain > 0.0);
                prop_assert!(t.case.amp_gain <= bounds.interpolate(t.target_frequency).unwrap());
                let main = t.case.time_gain * shape_fundamental_ratio(t.case.shape);
                prop_assert!(main >= input.f_min && main <= input.f_max, "{}", main);
                prop_assert!(t.snap_error.abs() <= t.case.time_gain * t.case.time_gain * input.sample_interval * 1.01);
            }
        }
    }
}
