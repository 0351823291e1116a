//! Run records and result persistence.
//!
//! Each run writes `results.json` (deterministic: configuration, derived
//! parameters, seeds, result tables and checks) and `record.json` (the same
//! plus wall-clock time and artifact paths).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Result;
use crate::lab::config::ExperimentConfig;

/// One pass/fail check. Informational checks never fail a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub bound: String,
    pub informational: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, value: f64, bound: impl Into<String>) -> Self {
        Self { name: name.into(), passed, value, bound: bound.into(), informational: false }
    }

    pub fn info(name: impl Into<String>, value: f64, note: impl Into<String>) -> Self {
        Self { name: name.into(), passed: true, value, bound: note.into(), informational: true }
    }

    pub fn line(&self) -> String {
        let tag = if self.informational {
            "INFO"
        } else if self.passed {
            "PASS"
        } else {
            "FAIL"
        };
        format!("{tag} {}: {:.6e} ({})", self.name, self.value, self.bound)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub experiment: String,
    pub config: ExperimentConfig,
    pub derived: Value,
    pub seeds: Vec<u64>,
    pub results: Value,
    pub checks: Vec<Check>,
    pub wall_clock_seconds: f64,
    pub artifacts: Vec<PathBuf>,
}

#[derive(Serialize)]
struct Deterministic<'a> {
    experiment: &'a str,
    config: &'a ExperimentConfig,
    derived: &'a Value,
    seeds: &'a [u64],
    results: &'a Value,
    checks: &'a [Check],
}

impl RunRecord {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            experiment: config.experiment.clone(),
            config: config.clone(),
            derived: Value::Null,
            seeds: Vec::new(),
            results: Value::Null,
            checks: Vec::new(),
            wall_clock_seconds: 0.0,
            artifacts: Vec::new(),
        }
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.informational || c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
        let mut f = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut f, value)?;
        f.write_all(b"\n")?;
        f.flush()?;
        Ok(())
    }

    /// Writes `results.json` and `record.json` into `dir`.
    pub fn persist(&mut self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let results = dir.join("results.json");
        let record = dir.join("record.json");
        Self::write_json(
            &results,
            &Deterministic {
                experiment: &self.experiment,
                config: &self.config,
                derived: &self.derived,
                seeds: &self.seeds,
                results: &self.results,
                checks: &self.checks,
            },
        )?;
        self.artifacts.push(results);
        self.artifacts.push(record.clone());
        Self::write_json(&record, self)
    }
}
