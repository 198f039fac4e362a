//! Config files, CSV result tables and run manifests.
//!
//! Configs are strict JSON (unknown keys rejected). Tables are written as
//! CSV with LF line endings and full double precision so identical configs
//! produce byte-identical files; a JSON manifest is written alongside.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::experiment::{ExperimentConfig, ResultTable};

/// Parse and validate an experiment config file.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::Config(format!("cannot read config {}: {e}", path.display()))
    })?;
    let cfg: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("config {}: {e}", path.display())))?;
    // surface field-level problems before any work is done
    cfg.resolve()?;
    Ok(cfg)
}

/// SHA-256 of the canonical JSON form of a config.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let canonical = serde_json::to_string(cfg).expect("config serializes");
    let digest = Sha256::digest(canonical.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Run metadata written next to every result table.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub config_sha256: String,
    pub timestamp_utc: String,
    pub code_version: String,
    pub units: BTreeMap<String, String>,
    pub columns: Vec<String>,
    pub rows: usize,
    #[serde(flatten)]
    pub meta: BTreeMap<String, serde_json::Value>,
}

fn unit_conventions() -> BTreeMap<String, String> {
    BTreeMap::from(
        [
            ("hbar", "1"),
            ("gamma", "1 (unit of energy)"),
            ("a", "1 (unit of length)"),
            ("e", "1"),
            ("tau", "pi * hbar / (2 gamma)"),
            ("flux", "phi / phi_0, phi_0 = 2 pi hbar / e"),
            ("entropy", "bits"),
        ]
        .map(|(k, v)| (k.to_string(), v.to_string())),
    )
}

/// Format a float with 17 significant digits, enough to round-trip f64.
fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write `table` as `<stem>.csv` plus `<stem>.manifest.json` under `dir`.
/// Returns the CSV path.
pub fn write_results(
    table: &ResultTable,
    cfg: &ExperimentConfig,
    dir: &Path,
    stem: &str,
) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let mut out = std::io::BufWriter::new(std::fs::File::create(&csv_path)?);
    writeln!(out, "{}", table.columns.join(","))?;
    for row in &table.rows {
        if row.len() != table.columns.len() {
            return Err(Error::InvalidParameter(format!(
                "row width {} does not match {} columns",
                row.len(),
                table.columns.len()
            )));
        }
        let line: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    out.flush()?;

    let manifest = RunManifest {
        config: cfg.clone(),
        config_sha256: config_hash(cfg),
        timestamp_utc: chrono::Utc::now().to_rfc3339(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        units: unit_conventions(),
        columns: table.columns.clone(),
        rows: table.rows.len(),
        meta: table.meta.clone(),
    };
    let manifest_path = dir.join(format!("{stem}.manifest.json"));
    std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(csv_path)
}
