//! CSV files with a config-hash header, JSON summaries and error documents.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, Violation};

pub const SCHEMA_VERSION: u32 = 1;
pub const OUT_DIR_ENV: &str = "CHIRAL_OUT_DIR";

pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let digest = Sha256::digest(cfg.canonical().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Collects written files for the run summary.
pub struct Sink {
    pub dir: PathBuf,
    pub stem: String,
    pub hash: String,
    header: String,
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

impl Sink {
    pub fn new(dir: &Path, cfg: &ExperimentConfig, command: &str) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        let hash = config_hash(cfg);
        let stem = if cfg.name.is_empty() {
            format!("{command}_{}", cfg.engine.name())
        } else {
            cfg.name.clone()
        };
        let header = format!(
            "chiral {} {command} engine={} seed={}\nconfig_sha256={hash}",
            env!("CARGO_PKG_VERSION"),
            cfg.engine.name(),
            cfg.seed
        );
        Ok(Self {
            dir: dir.to_path_buf(),
            stem,
            hash,
            header,
            files: Vec::new(),
            warnings: Vec::new(),
        })
    }

    /// The header comment block to hand to the core CSV writers.
    pub fn header(&self) -> &str {
        &self.header
    }

    pub fn write(&mut self, kind: &str, contents: &str) -> std::io::Result<()> {
        let path = self.dir.join(format!("{}_{kind}.csv", self.stem));
        fs::write(&path, contents)?;
        self.files.push(path);
        Ok(())
    }

    pub fn write_bytes(&mut self, name: &str, contents: &[u8]) -> std::io::Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents)?;
        self.files.push(path);
        Ok(())
    }

    pub fn summary(&mut self, command: &str, cfg: &ExperimentConfig, results: Value, wall_clock: f64) -> std::io::Result<Value> {
        let path = self.dir.join(format!("{}_summary.json", self.stem));
        self.files.push(path.clone());
        let doc = json!({
            "schema_version": SCHEMA_VERSION,
            "artifact_version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "engine": cfg.engine.name(),
            "name": cfg.name,
            "seed": cfg.seed,
            "config_hash": self.hash,
            "parameters": cfg,
            "results": results,
            "outputs": self.files.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
            "warnings": self.warnings,
            "wall_clock_s": wall_clock,
        });
        fs::write(&path, serde_json::to_string_pretty(&doc).expect("summary serializes"))?;
        Ok(doc)
    }
}

#[derive(Debug, Serialize)]
pub struct ErrorDoc<'a> {
    pub schema_version: u32,
    pub error: &'a str,
    pub message: String,
    #[serde(skip_serializing_if = "<[_]>::is_empty")]
    pub violations: &'a [Violation],
}

pub fn error_json(kind: &str, message: String, violations: &[Violation]) -> String {
    serde_json::to_string(&ErrorDoc {
        schema_version: SCHEMA_VERSION,
        error: kind,
        message,
        violations,
    })
    .expect("error serializes")
}

/// Keep only the requested observable columns (plus t) of a core CSV.
pub fn select_columns(csv: &str, keep: &[String]) -> String {
    if keep.is_empty() {
        return csv.to_string();
    }
    let mut out = String::new();
    let mut idx: Option<Vec<usize>> = None;
    for line in csv.lines() {
        if line.starts_with('#') {
            out.push_str(line);
            out.push('\n');
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        let cols = idx.get_or_insert_with(|| {
            cells
                .iter()
                .enumerate()
                .filter(|(i, c)| *i == 0 || keep.iter().any(|k| k == *c))
                .map(|(i, _)| i)
                .collect()
        });
        let row: Vec<&str> = cols.iter().filter_map(|&i| cells.get(i).copied()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
