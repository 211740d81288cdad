//! Line-delimited JSON artifacts and CSV plot tables.
//!
//! Every artifact starts with a header line carrying the schema version, the
//! artifact kind, the record count and kind-specific metadata, followed by
//! one JSON record per line.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

pub const CALIBRATION_FILE: &str = "calibration.jsonl";
pub const BOUNDS_FILE: &str = "bounds.jsonl";
pub const TESTS_FILE: &str = "tests.jsonl";
pub const RESULTS_FILE: &str = "results.jsonl";
pub const REPORT_FILE: &str = "report.json";
pub const SCATTER_FILE: &str = "scatter.csv";
pub const DOF_FILE: &str = "dof.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Header {
    pub schema_version: u32,
    pub artifact: String,
    pub records: usize,
    #[serde(default)]
    pub meta: serde_json::Value,
}

pub fn artifact_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

fn internal<'a, E: std::fmt::Display>(what: &str, path: &'a Path) -> impl FnOnce(E) -> CliError + 'a {
    let what = what.to_string();
    move |e| CliError::Internal(format!("{what} {}: {e}", path.display()))
}

/// Serializes an artifact to its text form.
pub fn encode_artifact<T: Serialize, M: Serialize>(
    artifact: &str,
    meta: &M,
    records: &[T],
) -> Result<String, CliError> {
    let header = Header {
        schema_version: SCHEMA_VERSION,
        artifact: artifact.to_string(),
        records: records.len(),
        meta: serde_json::to_value(meta).map_err(|e| CliError::Internal(e.to_string()))?,
    };
    let mut text = serde_json::to_string(&header).map_err(|e| CliError::Internal(e.to_string()))?;
    text.push('\n');
    for r in records {
        text.push_str(&serde_json::to_string(r).map_err(|e| CliError::Internal(e.to_string()))?);
        text.push('\n');
    }
    Ok(text)
}

/// Parses an artifact, checking its kind, version and record count.
pub fn decode_artifact<T: DeserializeOwned>(
    artifact: &str,
    text: &str,
) -> Result<(Header, Vec<T>), CliError> {
    let invalid = |msg: String| CliError::Invalid(format!("{artifact}: {msg}"));
    let mut lines = text.lines().enumerate();
    let (_, first) = lines.next().ok_or_else(|| invalid("empty file".into()))?;
    let header: Header =
        serde_json::from_str(first).map_err(|e| invalid(format!("header: {e}")))?;
    if header.schema_version != SCHEMA_VERSION {
        return Err(invalid(format!(
            "schema version {} is not supported (expected {SCHEMA_VERSION})",
            header.schema_version
        )));
    }
    if header.artifact != artifact {
        return Err(invalid(format!("file holds a {} artifact", header.artifact)));
    }
    let records = lines
        .map(|(n, line)| {
            serde_json::from_str(line).map_err(|e| invalid(format!("line {}: {e}", n + 1)))
        })
        .collect::<Result<Vec<T>, _>>()?;
    if records.len() != header.records {
        return Err(invalid(format!(
            "header announces {} records, found {}",
            header.records,
            records.len()
        )));
    }
    Ok((header, records))
}

pub fn write_artifact<T: Serialize, M: Serialize>(
    path: &Path,
    artifact: &str,
    meta: &M,
    records: &[T],
) -> Result<(), CliError> {
    let text = encode_artifact(artifact, meta, records)?;
    write_text(path, &text)
}

pub fn read_artifact<T: DeserializeOwned>(
    path: &Path,
    artifact: &str,
) -> Result<(Header, Vec<T>), CliError> {
    let text = fs::read_to_string(path).map_err(|e| {
        CliError::Invalid(format!("cannot read {} ({e}); run the producing step first", path.display()))
    })?;
    decode_artifact(artifact, &text)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(internal("cannot create", dir))?;
    }
    fs::write(path, text).map_err(internal("cannot write", path))
}

/// Comma-separated table with a header row taken from the row type's fields.
pub fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<(), CliError> {
    let mut wtr = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    wtr.write_record(header)
        .map_err(|e| CliError::Internal(e.to_string()))?;
    for row in rows {
        wtr.serialize(row).map_err(|e| CliError::Internal(e.to_string()))?;
    }
    let bytes = wtr.into_inner().map_err(|e| CliError::Internal(e.to_string()))?;
    let text = String::from_utf8(bytes).map_err(|e| CliError::Internal(e.to_string()))?;
    write_text(path, &text)
}
