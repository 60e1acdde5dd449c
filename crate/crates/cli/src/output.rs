//! In-memory run artifacts and the JSON report envelope. Files are only
//! written once a pipeline has finished.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use tmlambda::analysis::FitResult;
use tmlambda::Trace;

use crate::scenario::{Loaded, Scenario};

pub const TOOL: &str = "tmlambda";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Envelope shared by every JSON report.
#[derive(Debug, Serialize)]
pub struct RunReport<'a, T> {
    pub tool: &'static str,
    pub version: &'static str,
    pub pipeline: &'static str,
    pub scenario_hash: &'a str,
    pub seed: u64,
    pub scenario: &'a Scenario,
    pub results: T,
}

impl<'a, T: Serialize> RunReport<'a, T> {
    pub fn new(pipeline: &'static str, loaded: &'a Loaded, results: T) -> Self {
        Self {
            tool: TOOL,
            version: VERSION,
            pipeline,
            scenario_hash: &loaded.hash,
            seed: loaded.scenario.noise.seed,
            scenario: &loaded.scenario,
            results,
        }
    }
}

/// A fit that may have failed without failing the whole run.
#[derive(Debug, Serialize)]
#[serde(untagged)]
pub enum FitOutcome {
    Fit(FitResult),
    Failed { error: String },
}

impl From<tmlambda::Result<FitResult>> for FitOutcome {
    fn from(r: tmlambda::Result<FitResult>) -> Self {
        match r {
            Ok(f) => Self::Fit(f),
            Err(e) => Self::Failed { error: e.to_string() },
        }
    }
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Artifacts {
    pub files: BTreeMap<String, Vec<u8>>,
}

impl Artifacts {
    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().context("flushing CSV")?;
        self.files.insert(name.to_string(), bytes);
        Ok(())
    }

    pub fn trace(&mut self, name: &str, trace: &Trace) -> Result<()> {
        let mut buf = Vec::new();
        trace.write_csv(&mut buf)?;
        self.files.insert(name.to_string(), buf);
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.files.insert(name.to_string(), bytes);
        Ok(())
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (name, bytes) in &self.files {
            let p = dir.join(name);
            fs::write(&p, bytes).with_context(|| format!("writing {}", p.display()))?;
        }
        Ok(())
    }
}

/// Shortest round-trip decimal form.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}
