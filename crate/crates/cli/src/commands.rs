//! One function per subcommand. Each stage reads its inputs from and writes
//! its artifacts to the output directory, so stages can be resumed.

use std::path::PathBuf;

use serde::Serialize;
use serde_json::json;

use scopeprobe::analysis::{analyze as analyze_results, export_plot_data, AnalysisReport};
use scopeprobe::campaign::{
    choose_num_periods, derive_frequency_resolution, execute_campaign, generate_test_set,
    optimistic_amplitude_bound, AmplitudeBoundMap, BoundEntry, Calibration, GeneratedTest,
    TestResult, TestSet,
};

use crate::config::CampaignConfig;
use crate::persist::{self, artifact_path, read_artifact, write_artifact, write_csv, write_text};
use crate::CliError;

pub const SCATTER_COLUMNS: [&str; 9] = [
    "id",
    "shape",
    "f_main",
    "a_main",
    "dnl",
    "scope",
    "actuator_sat_fraction",
    "sensor_sat_fraction",
    "nl_deviation_mean",
];
pub const DOF_COLUMNS: [&str; 4] = ["id", "shape", "f", "dof"];

/// Resolved configuration of one invocation.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: CampaignConfig,
    pub out: PathBuf,
    pub workers: usize,
}

/// Successful completion, possibly with warnings.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub warnings: Vec<String>,
}

impl Outcome {
    fn merge(&mut self, other: Outcome) {
        self.warnings.extend(other.warnings);
    }
}

impl Context {
    fn path(&self, name: &str) -> PathBuf {
        artifact_path(&self.out, name)
    }

    /// From the configuration, else from the calibration record.
    fn base_periods(&self) -> Result<u32, CliError> {
        if let Some(k) = self.config.input.base_periods {
            return Ok(k);
        }
        let (_, records): (_, Vec<Calibration>) =
            read_artifact(&self.path(persist::CALIBRATION_FILE), "calibration").map_err(|e| {
                let (CliError::Invalid(msg) | CliError::Internal(msg)) = e;
                CliError::Invalid(format!(
                    "input.base_periods is not set and no calibration is available: {msg}"
                ))
            })?;
        records
            .first()
            .map(|c| c.chosen_periods)
            .ok_or_else(|| CliError::Invalid("calibration record is empty".into()))
    }
}

pub fn calibrate(ctx: &Context) -> Result<Outcome, CliError> {
    let cfg = &ctx.config;
    let input = cfg.required_input(cfg.input.base_periods.unwrap_or(1));
    let cal = choose_num_periods(
        &cfg.plant,
        &input,
        cfg.calibration.shape,
        cfg.calibration.max_periods,
    )?;
    let meta = json!({
        "dnl_threshold": input.dnl_threshold,
        "max_periods": cfg.calibration.max_periods,
    });
    write_artifact(
        &ctx.path(persist::CALIBRATION_FILE),
        "calibration",
        &meta,
        std::slice::from_ref(&cal),
    )?;
    let mut outcome = Outcome::default();
    if cal.is_warning() {
        outcome.warnings.push(format!(
            "calibration stress test never exceeded dnl threshold {}; using {} periods",
            input.dnl_threshold, cal.chosen_periods
        ));
    }
    log::info!("calibration chose {} periods", cal.chosen_periods);
    Ok(outcome)
}

pub fn bound(ctx: &Context) -> Result<Outcome, CliError> {
    let input = ctx.config.required_input(ctx.base_periods()?);
    let report = optimistic_amplitude_bound(&ctx.config.plant, &input, &ctx.config.bounding)?;
    let meta = json!({
        "probes": report.probe_count(),
        "diagnostics": report.diagnostics,
    });
    write_artifact(
        &ctx.path(persist::BOUNDS_FILE),
        "bounds",
        &meta,
        report.map.entries(),
    )?;
    log::info!(
        "bounded {} frequencies with {} probes",
        report.map.len(),
        report.probe_count()
    );
    Ok(Outcome {
        warnings: report
            .diagnostics
            .iter()
            .map(|d| format!("amplitude bound gap left open: {d:?}"))
            .collect(),
    })
}

pub fn generate(ctx: &Context) -> Result<Outcome, CliError> {
    let input = ctx.config.required_input(ctx.base_periods()?);
    let (_, entries): (_, Vec<BoundEntry>) =
        read_artifact(&ctx.path(persist::BOUNDS_FILE), "bounds")?;
    let bounds = AmplitudeBoundMap::from_entries(entries)?;
    let set = generate_test_set(&bounds, &ctx.config.shapes, &input, &ctx.config.sampling)?;
    let resolution = match ctx.config.sampling.frequency_resolution {
        Some(r) => r,
        None => derive_frequency_resolution(&bounds)?,
    };
    let meta = json!({
        "seed": input.seed,
        "frequency_resolution": resolution,
        "shapes": ctx.config.shapes,
    });
    write_artifact(&ctx.path(persist::TESTS_FILE), "test_set", &meta, &set.tests)?;
    log::info!("generated {} tests", set.len());
    Ok(Outcome::default())
}

pub fn run(ctx: &Context) -> Result<Outcome, CliError> {
    let input = ctx.config.required_input(ctx.base_periods()?);
    let (_, tests): (_, Vec<GeneratedTest>) =
        read_artifact(&ctx.path(persist::TESTS_FILE), "test_set")?;
    for (i, t) in tests.iter().enumerate() {
        if t.id != i {
            return Err(CliError::Invalid(format!("test_set: record {i} has id {}", t.id)));
        }
        t.case.validate()?;
    }
    let results = execute_campaign(&ctx.config.plant, &TestSet { tests }, &input, ctx.workers)?;
    let diverged = results.iter().filter(|r| r.diverged()).count();
    write_artifact(
        &ctx.path(persist::RESULTS_FILE),
        "results",
        &json!({ "diverged": diverged }),
        &results,
    )?;
    log::info!("executed {} tests, {diverged} diverged", results.len());
    Ok(Outcome::default())
}

#[derive(Serialize)]
struct ReportFile<'a> {
    schema_version: u32,
    report: &'a AnalysisReport,
}

pub fn analyze(ctx: &Context) -> Result<Outcome, CliError> {
    let th = ctx.config.input.dnl_threshold;
    let (_, results): (_, Vec<TestResult>) =
        read_artifact(&ctx.path(persist::RESULTS_FILE), "results")?;
    let report = analyze_results(&results, th, &ctx.config.analysis);
    let mut text = serde_json::to_string_pretty(&ReportFile {
        schema_version: persist::SCHEMA_VERSION,
        report: &report,
    })
    .map_err(|e| CliError::Internal(e.to_string()))?;
    text.push('\n');
    write_text(&ctx.path(persist::REPORT_FILE), &text)?;

    let tables = export_plot_data(&results, th, ctx.config.analysis.boundary_factor);
    write_csv(&ctx.path(persist::SCATTER_FILE), &SCATTER_COLUMNS, &tables.scatter)?;
    write_csv(&ctx.path(persist::DOF_FILE), &DOF_COLUMNS, &tables.dof)?;
    log::info!(
        "MR1: {} violations, MR2: {} violations, MR3: {} violations",
        report.mr1.len(),
        report.mr2.violations.len(),
        report.mr3.violations.len()
    );
    Ok(Outcome::default())
}

/// Calibration, bounding, generation, execution and analysis in sequence.
pub fn campaign(ctx: &Context) -> Result<Outcome, CliError> {
    let mut outcome = Outcome::default();
    for stage in [calibrate, bound, generate, run, analyze] {
        outcome.merge(stage(ctx)?);
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use scopeprobe::analysis::{DofRow, ScatterRow, ScopeClass};
    use scopeprobe::signals::ShapeKind;

    fn header_of<T: Serialize>(row: &T) -> Vec<String> {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.serialize(row).unwrap();
        let text = String::from_utf8(wtr.into_inner().unwrap()).unwrap();
        text.lines().next().unwrap().split(',').map(str::to_string).collect()
    }

    #[test]
    fn fixed_columns_match_row_fields() {
        let scatter = ScatterRow {
            id: 0,
            shape: ShapeKind::Sine,
            f_main: 1.0,
            a_main: 1.0,
            dnl: 0.0,
            scope: ScopeClass::Within,
            actuator_sat_fraction: 0.0,
            sensor_sat_fraction: 0.0,
            nl_deviation_mean: 0.0,
        };
        assert_eq!(header_of(&scatter), SCATTER_COLUMNS);
        let dof = DofRow {
            id: 0,
            shape: ShapeKind::Sine,
            f: 1.0,
            dof: 0.0,
        };
        assert_eq!(header_of(&dof), DOF_COLUMNS);
    }

    #[test]
    fn empty_tables_hold_only_the_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_csv::<DofRow>(&path, &DOF_COLUMNS, &[]).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "id,shape,f,dof\n");
    }
}
