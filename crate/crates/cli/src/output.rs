//! CSV and manifest writers. Numbers are always printed with 17 significant
//! digits so repeated runs produce identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `phi` plus one column per series. All series share `phis`.
pub fn write_columns(path: &Path, phis: &[f64], columns: &[(String, Vec<f64>)]) -> Result<()> {
    let mut header = vec!["phi".to_string()];
    header.extend(columns.iter().map(|(name, _)| name.clone()));
    let rows = phis.iter().enumerate().map(|(i, &phi)| {
        let mut row = vec![fmt_num(phi)];
        row.extend(columns.iter().map(|(_, v)| fmt_num(v[i])));
        row
    });
    write_csv(path, header, rows)
}

pub fn write_csv(
    path: &Path,
    header: Vec<String>,
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    ensure_parent(path)?;
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(&header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    ensure_parent(path)?;
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    Ok(())
}

/// `out.csv` -> `out.<suffix>`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    path.with_extension(suffix)
}

#[derive(Debug, Default, Serialize)]
pub struct Parameters {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub orders: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exposure: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub figure: Option<u8>,
}

/// Everything needed to rerun a command and get the same bytes back.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: Option<String>,
    /// Canonical text of the bench that was simulated.
    pub config: Option<String>,
    pub parameters: Parameters,
    pub output_path: String,
    pub tool_version: String,
}

impl RunManifest {
    pub fn new(command: &str, output: &Path, parameters: Parameters) -> Self {
        Self {
            command: command.to_string(),
            config_path: None,
            config: None,
            parameters,
            output_path: output.display().to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn with_config(mut self, path: &Path, canonical: String) -> Self {
        self.config_path = Some(path.display().to_string());
        self.config = Some(canonical);
        self
    }
}
