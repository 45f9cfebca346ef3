//! CSV emission and run manifests.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::commands::ResolvedConfig;

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// Scientific notation with 17 significant digits, enough to recover the
/// exact binary value.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

/// A table with a fixed header; every row must match the header width.
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width does not match header");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.into_inner().context("flushing CSV buffer")
    }
}

/// Collects the files a command writes so they can be listed in the manifest.
pub struct OutputDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.root.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn write_table(&mut self, name: &str, table: &Table) -> Result<PathBuf> {
        self.write(name, &table.to_csv()?)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write(name, &bytes)
    }

    /// Writes `manifest.json` last, listing everything written before it.
    pub fn finish(mut self, config: ResolvedConfig, master_seed: Option<u64>, wall_time_s: f64) -> Result<RunManifest> {
        let manifest = RunManifest {
            config_echo: config,
            tool_version: TOOL_VERSION.to_string(),
            master_seed,
            wall_time_s,
            output_paths: self.written.iter().map(|p| p.display().to_string()).collect(),
        };
        self.write_json("manifest.json", &manifest)?;
        Ok(manifest)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_echo: ResolvedConfig,
    pub tool_version: String,
    pub master_seed: Option<u64>,
    pub wall_time_s: f64,
    pub output_paths: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_full_precision() {
        for x in [0.1, 1.0 / 3.0, 7.35e-5, 92083.98318902454, -4.1337] {
            let s = fmt_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let digits = s.split('e').next().unwrap().chars().filter(|c| c.is_ascii_digit()).count();
            assert!(digits >= 15, "{s}");
        }
    }

    #[test]
    fn csv_has_header() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), fmt_float(0.5)]);
        let text = String::from_utf8(t.to_csv().unwrap()).unwrap();
        assert_eq!(text, "a,b\n1,5.0000000000000000e-1\n");
    }
}
