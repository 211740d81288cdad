//! Metamorphic relations over campaign results, bandwidth estimation and
//! scope classification.
//!
//! * MR1: a test that dominates another in amplitude and time gain has a
//!   strictly larger degree of non-linearity.
//! * MR2: between two linear tests of one shape, the faster one filters each
//!   matched component more.
//! * MR3: the bandwidth estimated from each shape is the same within `ε`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::campaign::TestResult;
use crate::error::{Error, Result};
use crate::signals::ShapeKind;

/// Degree-of-filtering level that defines the bandwidth.
pub const BANDWIDTH_DOF: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "relation", rename_all = "snake_case")]
pub enum MrViolation {
    /// `dominant` has amplitude and time gain at least those of `dominated`,
    /// one strictly, yet `dnl_dominant <= dnl_dominated`.
    Mr1 {
        shape: ShapeKind,
        dominant: usize,
        dominated: usize,
        #[serde(with = "crate::campaign::extended_float")]
        dnl_dominant: f64,
        #[serde(with = "crate::campaign::extended_float")]
        dnl_dominated: f64,
    },
    /// `faster` has the larger time gain, yet its component at `f_faster`
    /// is filtered no more than the matched one of `slower`.
    Mr2 {
        shape: ShapeKind,
        faster: usize,
        slower: usize,
        f_faster: f64,
        f_slower: f64,
        dof_faster: f64,
        dof_slower: f64,
    },
    /// `|bandwidth_a - bandwidth_b| >= epsilon`.
    Mr3 {
        shape_a: ShapeKind,
        shape_b: ShapeKind,
        bandwidth_a: f64,
        bandwidth_b: f64,
        epsilon: f64,
    },
}

fn by_shape(results: &[TestResult]) -> BTreeMap<ShapeKind, Vec<&TestResult>> {
    let mut groups: BTreeMap<ShapeKind, Vec<&TestResult>> = BTreeMap::new();
    for r in results {
        groups.entry(r.case.shape).or_default().push(r);
    }
    for group in groups.values_mut() {
        group.sort_by_key(|r| r.id);
    }
    groups
}

/// Every same-shape ordered pair where `i` dominates `j` must satisfy
/// `dnl(i) > dnl(j)`. Pairs where both runs diverged are not comparable and
/// are skipped.
pub fn check_mr1(results: &[TestResult]) -> Vec<MrViolation> {
    let mut out = Vec::new();
    for (shape, group) in by_shape(results) {
        for i in &group {
            for j in &group {
                let (ai, aj) = (i.case.amp_gain, j.case.amp_gain);
                let (ti, tj) = (i.case.time_gain, j.case.time_gain);
                let dominates = (ai > aj && ti >= tj) || (ai >= aj && ti > tj);
                if !dominates || (i.diverged() && j.diverged()) {
                    continue;
                }
                if i.dnl <= j.dnl {
                    out.push(MrViolation::Mr1 {
                        shape,
                        dominant: i.id,
                        dominated: j.id,
                        dnl_dominant: i.dnl,
                        dnl_dominated: j.dnl,
                    });
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Mr2Options {
    /// Matching window, as a fraction of the slower test's DFT bin width.
    pub bin_tolerance: f64,
    /// Differences in dof smaller than this are not violations.
    pub equality_tolerance: f64,
}

impl Default for Mr2Options {
    fn default() -> Self {
        Mr2Options {
            bin_tolerance: 0.5,
            equality_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Mr2Report {
    pub violations: Vec<MrViolation>,
    /// Components compared.
    pub matched: usize,
    /// Components with no counterpart in the other test.
    pub unmatched: usize,
}

/// Compares same-shape pairs of linear tests (dnl below `dnl_threshold`)
/// component by component. 0 Hz components are not compared.
pub fn check_mr2(results: &[TestResult], dnl_threshold: f64, options: &Mr2Options) -> Mr2Report {
    let mut report = Mr2Report::default();
    for (shape, group) in by_shape(results) {
        let linear: Vec<_> = group
            .into_iter()
            .filter(|r| r.is_linear(dnl_threshold))
            .collect();
        for i in &linear {
            for j in &linear {
                let (ti, tj) = (i.case.time_gain, j.case.time_gain);
                if ti <= tj {
                    continue;
                }
                let bin_width = tj / f64::from(j.case.periods);
                let window = options.bin_tolerance * bin_width;
                for p in i.dof.iter().filter(|p| p.frequency > 0.0) {
                    let target = p.frequency * tj / ti;
                    let matched = j
                        .dof
                        .iter()
                        .filter(|q| q.frequency > 0.0 && (q.frequency - target).abs() <= window)
                        .min_by(|a, b| {
                            (a.frequency - target)
                                .abs()
                                .total_cmp(&(b.frequency - target).abs())
                        });
                    let Some(q) = matched else {
                        report.unmatched += 1;
                        continue;
                    };
                    report.matched += 1;
                    if p.dof <= q.dof && q.dof - p.dof >= options.equality_tolerance {
                        report.violations.push(MrViolation::Mr2 {
                            shape,
                            faster: i.id,
                            slower: j.id,
                            f_faster: p.frequency,
                            f_slower: q.frequency,
                            dof_faster: p.dof,
                            dof_slower: q.dof,
                        });
                    }
                }
            }
        }
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "hz", rename_all = "snake_case")]
pub enum Bandwidth {
    Defined(f64),
    /// No pooled component is filtered by more than half.
    UndefinedAboveRange,
    /// The lowest pooled component is already filtered by more than half.
    UndefinedBelowRange,
}

impl Bandwidth {
    pub fn hz(self) -> Option<f64> {
        match self {
            Bandwidth::Defined(f) => Some(f),
            _ => None,
        }
    }
}

/// Pools the non-zero-frequency dof points of the linear tests, sorts them by
/// frequency and interpolates the first crossing of dof = 0.5.
pub fn estimate_bandwidth<'a, I>(results: I, dnl_threshold: f64) -> Result<Bandwidth>
where
    I: IntoIterator<Item = &'a TestResult>,
{
    let mut any_linear = false;
    let mut points: Vec<(f64, f64)> = Vec::new();
    for r in results.into_iter().filter(|r| r.is_linear(dnl_threshold)) {
        any_linear = true;
        points.extend(
            r.dof
                .iter()
                .filter(|p| p.frequency > 0.0)
                .map(|p| (p.frequency, p.dof)),
        );
    }
    if !any_linear {
        return Err(Error::InsufficientData("no linear test to estimate a bandwidth".into()));
    }
    if points.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "bandwidth needs at least two components, got {}",
            points.len()
        )));
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let Some(k) = points.iter().position(|&(_, d)| d > BANDWIDTH_DOF) else {
        return Ok(Bandwidth::UndefinedAboveRange);
    };
    if k == 0 {
        return Ok(Bandwidth::UndefinedBelowRange);
    }
    let ((f0, d0), (f1, d1)) = (points[k - 1], points[k]);
    let f = if f1 == f0 {
        f0
    } else {
        f0 + (BANDWIDTH_DOF - d0) * (f1 - f0) / (d1 - d0)
    };
    Ok(Bandwidth::Defined(f))
}

/// Bandwidth per shape; shapes without linear tests are left out.
pub fn bandwidths_by_shape(
    results: &[TestResult],
    dnl_threshold: f64,
) -> BTreeMap<ShapeKind, Bandwidth> {
    by_shape(results)
        .into_iter()
        .filter_map(|(shape, group)| {
            estimate_bandwidth(group, dnl_threshold)
                .ok()
                .map(|b| (shape, b))
        })
        .collect()
}

/// 20% of the mean defined bandwidth.
pub fn default_epsilon(bandwidths: &BTreeMap<ShapeKind, Bandwidth>) -> Option<f64> {
    let defined: Vec<f64> = bandwidths.values().filter_map(|b| b.hz()).collect();
    if defined.is_empty() {
        None
    } else {
        Some(0.2 * defined.iter().sum::<f64>() / defined.len() as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Mr3Report {
    pub violations: Vec<MrViolation>,
    /// Shapes whose bandwidth is undefined.
    pub undefined: Vec<ShapeKind>,
}

pub fn check_mr3(bandwidths: &BTreeMap<ShapeKind, Bandwidth>, epsilon: f64) -> Mr3Report {
    let defined: Vec<(ShapeKind, f64)> = bandwidths
        .iter()
        .filter_map(|(&s, b)| b.hz().map(|f| (s, f)))
        .collect();
    let mut report = Mr3Report {
        undefined: bandwidths
            .iter()
            .filter(|(_, b)| b.hz().is_none())
            .map(|(&s, _)| s)
            .collect(),
        ..Mr3Report::default()
    };
    for (a, &(shape_a, fa)) in defined.iter().enumerate() {
        for &(shape_b, fb) in &defined[a + 1..] {
            if (fa - fb).abs() >= epsilon {
                report.violations.push(MrViolation::Mr3 {
                    shape_a,
                    shape_b,
                    bandwidth_a: fa,
                    bandwidth_b: fb,
                    epsilon,
                });
            }
        }
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScopeClass {
    Within,
    BoundaryStress,
    Outside,
}

impl ScopeClass {
    pub fn name(self) -> &'static str {
        match self {
            ScopeClass::Within => "within",
            ScopeClass::BoundaryStress => "boundary_stress",
            ScopeClass::Outside => "outside",
        }
    }
}

/// Default ratio of the within/boundary split to the dnl threshold.
pub const DEFAULT_BOUNDARY_FACTOR: f64 = 0.5;

pub fn classify_scope(result: &TestResult, dnl_threshold: f64, boundary_factor: f64) -> ScopeClass {
    if result.diverged() || !(result.dnl < dnl_threshold) {
        ScopeClass::Outside
    } else if result.dnl < boundary_factor * dnl_threshold {
        ScopeClass::Within
    } else {
        ScopeClass::BoundaryStress
    }
}

/// Field order is the column order of the exported table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterRow {
    pub id: usize,
    pub shape: ShapeKind,
    pub f_main: f64,
    pub a_main: f64,
    #[serde(with = "crate::campaign::extended_float")]
    pub dnl: f64,
    pub scope: ScopeClass,
    pub actuator_sat_fraction: f64,
    pub sensor_sat_fraction: f64,
    pub nl_deviation_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DofRow {
    pub id: usize,
    pub shape: ShapeKind,
    pub f: f64,
    pub dof: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlotTables {
    pub scatter: Vec<ScatterRow>,
    pub dof: Vec<DofRow>,
}

/// One scatter row per result, and one dof row per relevant component of
/// every linear result, in result order.
pub fn export_plot_data(
    results: &[TestResult],
    dnl_threshold: f64,
    boundary_factor: f64,
) -> PlotTables {
    let mut tables = PlotTables::default();
    for r in results {
        tables.scatter.push(ScatterRow {
            id: r.id,
            shape: r.case.shape,
            f_main: r.main.frequency,
            a_main: r.main.amplitude,
            dnl: r.dnl,
            scope: classify_scope(r, dnl_threshold, boundary_factor),
            actuator_sat_fraction: r.actuator_saturation,
            sensor_sat_fraction: r.sensor_saturation,
            nl_deviation_mean: r.nonlinearity_deviation,
        });
        if r.is_linear(dnl_threshold) {
            tables.dof.extend(r.dof.iter().map(|p| DofRow {
                id: r.id,
                shape: r.case.shape,
                f: p.frequency,
                dof: p.dof,
            }));
        }
    }
    tables
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisOptions {
    pub boundary_factor: f64,
    pub mr2: Mr2Options,
    /// MR3 tolerance in Hz; 20% of the mean bandwidth when absent.
    pub mr3_epsilon: Option<f64>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            boundary_factor: DEFAULT_BOUNDARY_FACTOR,
            mr2: Mr2Options::default(),
            mr3_epsilon: None,
        }
    }
}

/// Everything the relations say about one result set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub tests: usize,
    pub scope_counts: BTreeMap<ScopeClass, usize>,
    pub mr1: Vec<MrViolation>,
    pub mr2: Mr2Report,
    pub bandwidths: BTreeMap<ShapeKind, Bandwidth>,
    pub mr3_epsilon: Option<f64>,
    pub mr3: Mr3Report,
}

pub fn analyze(results: &[TestResult], dnl_threshold: f64, options: &AnalysisOptions) -> AnalysisReport {
    let mut scope_counts = BTreeMap::new();
    for r in results {
        *scope_counts
            .entry(classify_scope(r, dnl_threshold, options.boundary_factor))
            .or_insert(0) += 1;
    }
    let bandwidths = bandwidths_by_shape(results, dnl_threshold);
    let mr3_epsilon = options.mr3_epsilon.or_else(|| default_epsilon(&bandwidths));
    let mr3 = match mr3_epsilon {
        Some(eps) => check_mr3(&bandwidths, eps),
        None => check_mr3(&bandwidths, f64::INFINITY),
    };
    AnalysisReport {
        tests: results.len(),
        scope_counts,
        mr1: check_mr1(results),
        mr2: check_mr2(results, dnl_threshold, &options.mr2),
        bandwidths,
        mr3_epsilon,
        mr3,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::TestCase;
    use crate::spectral::{Component, DofPoint};
    use proptest::prelude::*;

    fn result(id: usize, shape: ShapeKind, amp: f64, tg: f64, dnl: f64, dof: &[(f64, f64)]) -> TestResult {
        TestResult {
            id,
            case: TestCase {
                shape,
                amp_gain: amp,
                time_gain: tg,
                periods: 3,
                sample_interval: 0.001,
            },
            target_frequency: tg,
            main: Component {
                frequency: tg,
                amplitude: amp,
            },
            dnl,
            dof: dof
                .iter()
                .map(|&(frequency, dof)| DofPoint {
                    frequency,
                    amplitude: amp,
                    dof,
                })
                .collect(),
            actuator_saturation: 0.0,
            sensor_saturation: 0.0,
            nonlinearity_deviation: 0.0,
            diverged_at: None,
        }
    }

    #[test]
    fn mr1_examples() {
        let sq = ShapeKind::Square;
        let ok = [result(0, sq, 2.0, 1.0, 0.3, &[]), result(1, sq, 1.0, 1.0, 0.1, &[])];
        assert!(check_mr1(&ok).is_empty());
        let bad = [result(0, sq, 1.5, 0.1, 0.01, &[]), result(1, sq, 0.6, 0.1, 0.05, &[])];
        assert_eq!(
            check_mr1(&bad),
            vec![MrViolation::Mr1 {
                shape: sq,
                dominant: 0,
                dominated: 1,
                dnl_dominant: 0.01,
                dnl_dominated: 0.05
            }]
        );
        // incomparable: more amplitude, less time gain
        let inc = [result(0, sq, 2.0, 0.1, 0.0, &[]), result(1, sq, 1.0, 1.0, 0.5, &[])];
        assert!(check_mr1(&inc).is_empty());
        // different shapes never compared
        let mixed = [
            result(0, sq, 2.0, 1.0, 0.0, &[]),
            result(1, ShapeKind::Triangle, 1.0, 1.0, 0.5, &[]),
        ];
        assert!(check_mr1(&mixed).is_empty());
    }

    #[test]
    fn mr1_skips_two_diverged_runs() {
        let sq = ShapeKind::Square;
        let mut a = result(0, sq, 2.0, 1.0, f64::INFINITY, &[]);
        let mut b = result(1, sq, 1.0, 1.0, f64::INFINITY, &[]);
        a.diverged_at = Some(10);
        b.diverged_at = Some(20);
        assert!(check_mr1(&[a.clone(), b]).is_empty());
        let c = result(2, sq, 1.0, 1.0, 0.2, &[]);
        assert!(check_mr1(&[a, c]).is_empty());
    }

    #[test]
    fn mr2_examples() {
        let sq = ShapeKind::Square;
        let slow = result(0, sq, 0.6, 0.1, 0.05, &[(0.0, 0.0), (0.1, 0.0), (0.3, 0.02)]);
        let fast = result(1, sq, 0.6, 1.0, 0.06, &[(0.0, 0.0), (1.0, 0.45), (3.0, 0.9)]);
        let report = check_mr2(&[slow.clone(), fast.clone()], 0.15, &Mr2Options::default());
        assert!(report.violations.is_empty());
        assert_eq!(report.matched, 2);

        // equal tracking, strict and relaxed
        let a = result(0, sq, 1.0, 0.1, 0.0, &[(0.1, 0.0)]);
        let b = result(1, sq, 1.0, 0.2, 0.0, &[(0.2, 0.0)]);
        let strict = Mr2Options {
            equality_tolerance: 0.0,
            ..Mr2Options::default()
        };
        assert_eq!(check_mr2(&[a.clone(), b.clone()], 0.15, &strict).violations.len(), 1);
        assert!(check_mr2(&[a, b], 0.15, &Mr2Options::default()).violations.is_empty());

        // non-linear tests do not take part
        let nl = result(2, sq, 0.6, 2.0, 0.2, &[(2.0, 0.0)]);
        let report = check_mr2(&[slow, fast, nl], 0.15, &Mr2Options::default());
        assert_eq!(report.matched, 2);
    }

    #[test]
    fn mr2_flags_decreasing_filtering() {
        let sq = ShapeKind::Sawtooth;
        let tests: Vec<_> = (0..4)
            .map(|k| {
                let tg = 0.1 * (k + 1) as f64;
                result(k, sq, 1.0, tg, 0.0, &[(tg, 0.8 - 0.2 * k as f64)])
            })
            .collect();
        let report = check_mr2(&tests, 0.15, &Mr2Options::default());
        assert_eq!(report.violations.len(), 6);
    }

    #[test]
    fn mr2_counts_unmatched() {
        let sq = ShapeKind::Square;
        let a = result(0, sq, 1.0, 0.1, 0.0, &[(0.1, 0.1), (0.3, 0.1)]);
        let b = result(1, sq, 1.0, 0.2, 0.0, &[(0.2, 0.2)]);
        let report = check_mr2(&[a, b], 0.15, &Mr2Options::default());
        assert_eq!((report.matched, report.unmatched), (1, 0));
        let c = result(2, sq, 1.0, 0.3, 0.0, &[(0.3, 0.3), (0.9, 0.9)]);
        let report = check_mr2(&[result(0, sq, 1.0, 0.1, 0.0, &[(0.1, 0.1)]), c], 0.15, &Mr2Options::default());
        assert_eq!((report.matched, report.unmatched), (1, 1));
    }

    #[test]
    fn bandwidth_interpolation() {
        let sq = ShapeKind::Square;
        let rs = [result(0, sq, 1.0, 0.4, 0.0, &[(0.4, 0.3), (0.8, 0.7)])];
        assert!((estimate_bandwidth(&rs, 0.15).unwrap().hz().unwrap() - 0.6).abs() < 1e-12);
        let low = [result(0, sq, 1.0, 0.4, 0.0, &[(0.4, 0.3), (0.8, 0.4)])];
        assert_eq!(estimate_bandwidth(&low, 0.15).unwrap(), Bandwidth::UndefinedAboveRange);
        let high = [result(0, sq, 1.0, 0.4, 0.0, &[(0.4, 0.6), (0.8, 0.7)])];
        assert_eq!(estimate_bandwidth(&high, 0.15).unwrap(), Bandwidth::UndefinedBelowRange);
        let none = [result(0, sq, 1.0, 0.4, 0.3, &[])];
        assert!(estimate_bandwidth(&none, 0.15).is_err());
    }

    #[test]
    fn mr3_examples() {
        let mut m = BTreeMap::new();
        m.insert(ShapeKind::Square, Bandwidth::Defined(0.9));
        m.insert(ShapeKind::Triangle, Bandwidth::Defined(0.92));
        assert!(check_mr3(&m, 0.18).violations.is_empty());
        let mut m = BTreeMap::new();
        m.insert(ShapeKind::Square, Bandwidth::Defined(0.9));
        m.insert(ShapeKind::Sawtooth, Bandwidth::Defined(0.6));
        assert_eq!(check_mr3(&m, 0.18).violations.len(), 1);
        let mut single = BTreeMap::new();
        single.insert(ShapeKind::Square, Bandwidth::Defined(0.9));
        single.insert(ShapeKind::Sine, Bandwidth::UndefinedAboveRange);
        let r = check_mr3(&single, 0.18);
        assert!(r.violations.is_empty());
        assert_eq!(r.undefined, vec![ShapeKind::Sine]);
        assert!((default_epsilon(&m).unwrap() - 0.15).abs() < 1e-15);
    }

    #[test]
    fn scope_classes() {
        let sq = ShapeKind::Square;
        let class = |dnl| classify_scope(&result(0, sq, 1.0, 1.0, dnl, &[]), 0.15, 0.5);
        assert_eq!(class(0.16), ScopeClass::Outside);
        assert_eq!(class(0.15), ScopeClass::Outside);
        assert_eq!(class(0.0), ScopeClass::Within);
        assert_eq!(class(0.10), ScopeClass::BoundaryStress);
        assert_eq!(class(f64::INFINITY), ScopeClass::Outside);
    }

    #[test]
    fn plot_tables() {
        assert_eq!(export_plot_data(&[], 0.15, 0.5), PlotTables::default());
        let one = [result(4, ShapeKind::Square, 1.0, 0.5, 0.01, &[(0.0, 0.0), (0.5, 0.1), (1.5, 0.3)])];
        let t = export_plot_data(&one, 0.15, 0.5);
        assert_eq!(t.scatter.len(), 1);
        assert_eq!(t.dof.len(), 3);
        assert_eq!(t.scatter[0].scope, ScopeClass::Within);
        assert_eq!((t.dof[1].id, t.dof[1].f, t.dof[1].dof), (4, 0.5, 0.1));
    }

    #[test]
    fn report_serializes() {
        let rs = [
            result(0, ShapeKind::Square, 1.0, 0.4, 0.0, &[(0.4, 0.3), (0.8, 0.7)]),
            result(1, ShapeKind::Square, 2.0, 0.4, f64::INFINITY, &[]),
        ];
        let report = analyze(&rs, 0.15, &AnalysisOptions::default());
        let json = serde_json::to_string(&report).unwrap();
        let back: AnalysisReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
        assert_eq!(report.scope_counts[&ScopeClass::Outside], 1);
    }

    fn arb_results() -> impl Strategy<Value = Vec<TestResult>> {
        proptest::collection::vec(
            (0usize..3, 1u32..5, 1u32..5, 0.0f64..0.3, 0.0f64..1.0),
            0..12,
        )
        .prop_map(|rows| {
            rows.into_iter()
                .enumerate()
                .map(|(id, (s, a, t, dnl, dof))| {
                    let tg = 0.1 * f64::from(t);
                    result(id, ShapeKind::ALL[s], f64::from(a), tg, dnl, &[(tg, dof), (3.0 * tg, dof)])
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn checkers_ignore_input_order(results in arb_results(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = results.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(check_mr1(&results), check_mr1(&shuffled));
            let opts = Mr2Options::default();
            prop_assert_eq!(check_mr2(&results, 0.15, &opts), check_mr2(&shuffled, 0.15, &opts));
            prop_assert_eq!(bandwidths_by_shape(&results, 0.15), bandwidths_by_shape(&shuffled, 0.15));
        }

        #[test]
        fn scope_is_monotone_in_dnl(a in 0.0f64..1.0, b in 0.0f64..1.0, th in 0.01f64..1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let sq = ShapeKind::Square;
            let c_lo = classify_scope(&result(0, sq, 1.0, 1.0, lo, &[]), th, 0.5);
            let c_hi = classify_scope(&result(0, sq, 1.0, 1.0, hi, &[]), th, 0.5);
            prop_assert!(c_lo <= c_hi);
        }

        #[test]
        fn bandwidth_ignores_amplitude_scale(results in arb_results(), scale in 0.1f64..10.0) {
            let scaled: Vec<_> = results
                .iter()
                .cloned()
                .map(|mut r| {
                    r.case.amp_gain *= scale;
                    for p in &mut r.dof {
                        p.amplitude *= scale;
                    }
                    r
                })
                .collect();
            prop_assert_eq!(bandwidths_by_shape(&results, 0.15), bandwidths_by_shape(&scaled, 0.15));
        }
    }
}
