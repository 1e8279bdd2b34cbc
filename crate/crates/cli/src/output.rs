//! Artifact writing and the per-run manifest.

use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::Instant;

use coda_core::io::{fmt_num, write_csv, write_matrix};
use coda_core::nalgebra::DMatrix;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// A JSON number rounded like the CSV output; non-finite values become null.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let rounded: f64 = fmt_num(x).parse().unwrap_or(x);
    json!(rounded)
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub fn sha256_file(path: &Path) -> Result<(String, u64), CliError> {
    let mut f = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut h = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    let mut n = 0u64;
    loop {
        let k = f.read(&mut buf).map_err(|e| io_err(path, e))?;
        if k == 0 {
            break;
        }
        n += k as u64;
        h.update(&buf[..k]);
    }
    Ok((format!("{:x}", h.finalize()), n))
}

pub struct Run {
    pub out_dir: PathBuf,
    stem: String,
    inputs: Vec<Value>,
    outputs: Vec<String>,
    timings: Map<String, Value>,
    mark: Instant,
}

impl Run {
    pub fn new(out_dir: PathBuf, stem: &str) -> Result<Self, CliError> {
        std::fs::create_dir_all(&out_dir).map_err(|e| io_err(&out_dir, e))?;
        Ok(Self {
            out_dir,
            stem: stem.to_string(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            timings: Map::new(),
            mark: Instant::now(),
        })
    }

    pub fn stem(&self) -> &str {
        &self.stem
    }

    pub fn record_input(&mut self, path: &Path) -> Result<(), CliError> {
        let (sha, bytes) = sha256_file(path)?;
        self.inputs.push(json!({
            "path": path.display().to_string(),
            "sha256": sha,
            "bytes": bytes,
        }));
        Ok(())
    }

    /// Records the time since the previous lap under `name`.
    pub fn lap(&mut self, name: &str) {
        let now = Instant::now();
        let ms = now.duration_since(self.mark).as_secs_f64() * 1e3;
        self.timings.insert(name.to_string(), json!((ms * 1e3).round() / 1e3));
        self.mark = now;
    }

    fn target(&mut self, suffix: &str) -> PathBuf {
        let name = format!("{}{suffix}", self.stem);
        self.outputs.push(name.clone());
        self.out_dir.join(name)
    }

    fn create(&mut self, suffix: &str) -> Result<(std::fs::File, PathBuf), CliError> {
        let path = self.target(suffix);
        let f = std::fs::File::create(&path).map_err(|e| io_err(&path, e))?;
        Ok((f, path))
    }

    pub fn csv(&mut self, suffix: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let (f, _) = self.create(suffix)?;
        let header: Vec<String> = header.iter().map(|s| s.to_string()).collect();
        write_csv(std::io::BufWriter::new(f), &header, rows)?;
        Ok(())
    }

    pub fn matrix(
        &mut self,
        suffix: &str,
        corner: &str,
        rows: &[String],
        cols: &[String],
        m: &DMatrix<f64>,
    ) -> Result<(), CliError> {
        let (f, _) = self.create(suffix)?;
        write_matrix(std::io::BufWriter::new(f), corner, rows, cols, m)?;
        Ok(())
    }

    pub fn json(&mut self, suffix: &str, v: &Value) -> Result<(), CliError> {
        let path = self.target(suffix);
        let mut text = serde_json::to_string_pretty(v).expect("JSON values serialize");
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| io_err(&path, e))
    }

    pub fn text(&mut self, suffix: &str, body: &str) -> Result<(), CliError> {
        let path = self.target(suffix);
        std::fs::write(&path, body).map_err(|e| io_err(&path, e))
    }

    /// Writes `<stem>.manifest.json`.
    pub fn finish(mut self, command: &str, config: Value, seed: u64) -> Result<PathBuf, CliError> {
        self.lap("write");
        let manifest = json!({
            "schema_version": SCHEMA_VERSION,
            "command": command,
            "inputs": self.inputs,
            "config": config,
            "seed": seed,
            "versions": {
                "coda-cli": env!("CARGO_PKG_VERSION"),
                "coda-core": coda_core::VERSION,
            },
            "outputs": self.outputs,
            "timings_ms": self.timings,
        });
        let path = self.out_dir.join(format!("{}.manifest.json", self.stem));
        let mut text = serde_json::to_string_pretty(&manifest).expect("JSON values serialize");
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| io_err(&path, e))?;
        Ok(path)
    }
}
