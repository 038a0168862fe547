//! File output. Every file is written to a temporary sibling and renamed
//! into place, so readers never see a partial file.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::error::{CliError, CliResult};

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Writes `bytes` to `path` atomically.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> CliResult<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

/// `x1 .. xm`.
pub fn default_header(m: usize) -> Vec<String> {
    (1..=m).map(|j| format!("x{j}")).collect()
}

/// A matrix as CSV with a header row. Floats use the shortest
/// representation that parses back to the same value.
pub fn matrix_csv(header: &[String], rows: &[Vec<f64>]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))
}

pub fn write_matrix_csv(path: &Path, header: &[String], rows: &[Vec<f64>]) -> CliResult<()> {
    write_atomic(path, &matrix_csv(header, rows)?)
}

/// One-column series with an iteration index.
pub fn write_series_csv(path: &Path, name: &str, values: &[f64]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["iteration", name])?;
    for (i, v) in values.iter().enumerate() {
        w.serialize((i + 1, v))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))?;
    write_atomic(path, &bytes)
}

/// Reads a matrix written by [`write_matrix_csv`].
pub fn read_matrix_csv(path: &Path) -> CliResult<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.iter().map(str::to_string).collect();
    let rows = r.deserialize().collect::<Result<Vec<Vec<f64>>, _>>()?;
    Ok((header, rows))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Output files of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunFiles {
    pub dir: PathBuf,
    pub samples: PathBuf,
    pub logk_trace: PathBuf,
    pub ess_report: PathBuf,
    pub manifest: PathBuf,
}

impl RunFiles {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            dir: dir.to_path_buf(),
            samples: dir.join("samples.csv"),
            logk_trace: dir.join("logk_trace.csv"),
            ess_report: dir.join("ess_report.json"),
            manifest: dir.join("manifest.json"),
        }
    }
}
