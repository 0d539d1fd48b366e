use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::ValueEnum;
use riesz_core::solver::{SimConfig, State};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Plain decimal for moderate magnitudes, shortest exponent form otherwise; `inf` for `∞`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else if x != 0.0 && (x.abs() < 1e-4 || x.abs() >= 1e16) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub fn parse_f64(s: &str) -> Result<f64, CliError> {
    match s.trim() {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        t => t.parse().map_err(|_| CliError::Config(format!("bad number {s:?}"))),
    }
}

/// A run's output directory plus the list of files written into it.
pub struct OutputDir {
    pub root: PathBuf,
    pub format: Format,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path, format: Format) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(CliError::io(root))?;
        Ok(Self { root: root.to_path_buf(), format, written: Vec::new() })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.written.push(name.to_string());
        self.root.join(name)
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.path(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(CliError::io(parent))?;
        }
        fs::write(&path, bytes).map_err(CliError::io(&path))
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Numeric(e.to_string()))?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Numeric(e.to_string()))?;
        self.write_bytes(name, &bytes)
    }

    /// Table in the chosen format: `<stem>.csv` or `<stem>.json` (array of objects).
    pub fn write_table(&mut self, stem: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        match self.format {
            Format::Csv => self.write_csv(&format!("{stem}.csv"), header, rows),
            Format::Json => {
                let objects: Vec<Value> = rows
                    .iter()
                    .map(|r| {
                        let map = header
                            .iter()
                            .zip(r)
                            .map(|(h, v)| {
                                let value = match parse_f64(v) {
                                    Ok(x) if x.is_finite() => json!(x),
                                    _ => json!(v),
                                };
                                (h.to_string(), value)
                            })
                            .collect();
                        Value::Object(map)
                    })
                    .collect();
                self.write_json(&format!("{stem}.json"), &objects)
            }
        }
    }

    /// Flat little-endian `f64` arrays (`N`, then each `W_j`) plus a JSON sidecar.
    pub fn write_snapshot(&mut self, index: usize, state: &State, config: &SimConfig) -> Result<(), CliError> {
        let mut bytes = Vec::new();
        let mut fields = vec!["N".to_string()];
        for v in state.n.values() {
            bytes.write_all(&v.to_le_bytes()).expect("vec write");
        }
        for (j, c) in state.w.components().iter().enumerate() {
            fields.push(format!("W{j}"));
            for v in c.values() {
                bytes.write_all(&v.to_le_bytes()).expect("vec write");
            }
        }
        let stem = format!("snapshots/snap_{index:05}");
        self.write_bytes(&format!("{stem}.bin"), &bytes)?;
        let sidecar = json!({
            "dim": config.dim,
            "n": config.n,
            "length": config.length,
            "tau": state.tau,
            "t": state.time(),
            "dtype": "f64-le",
            "layout": "row-major, axis 0 slowest",
            "fields": fields,
        });
        self.write_json(&format!("{stem}.json"), &sidecar)
    }

    /// Writes `manifest.json` echoing the resolved configuration; the only file with a timestamp.
    pub fn finish(mut self, command: &str, config: &Value, status: &str) -> Result<(), CliError> {
        let created = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let files = std::mem::take(&mut self.written);
        let manifest = json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "config": config,
            "format": self.format,
            "status": status,
            "files": files,
            "created_unix": created,
        });
        self.write_json("manifest.json", &manifest)
    }
}
