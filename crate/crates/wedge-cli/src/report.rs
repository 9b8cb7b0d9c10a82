//! Report records and their CSV / JSON-lines emission.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRecord {
    pub suite: String,
    pub op: String,
    pub params: BTreeMap<String, f64>,
    pub value: f64,
    pub baseline: Option<f64>,
    pub outcome: Outcome,
    pub seed: u64,
    pub note: String,
}

/// Append-only record list for one suite; wall-clock times are kept apart
/// so the report files are reproducible.
#[derive(Debug)]
pub struct Reporter {
    pub suite: String,
    pub seed: u64,
    pub records: Vec<ReportRecord>,
    runtimes: Vec<u128>,
    started: Instant,
}

pub fn params<const N: usize>(kv: [(&str, f64); N]) -> BTreeMap<String, f64> {
    kv.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

impl Reporter {
    pub fn new(suite: &str, seed: u64) -> Self {
        Self { suite: suite.into(), seed, records: Vec::new(), runtimes: Vec::new(), started: Instant::now() }
    }

    pub fn push(&mut self, op: &str, params: BTreeMap<String, f64>, value: f64, baseline: Option<f64>, outcome: Outcome, note: impl Into<String>, runtime_ms: u128) {
        self.records.push(ReportRecord {
            suite: self.suite.clone(),
            op: op.into(),
            params,
            value,
            baseline,
            outcome,
            seed: self.seed,
            note: note.into(),
        });
        self.runtimes.push(runtime_ms);
    }

    /// Record a check that passes when `pass` holds.
    #[allow(clippy::too_many_arguments)]
    pub fn check(&mut self, op: &str, params: BTreeMap<String, f64>, value: f64, baseline: Option<f64>, pass: bool, note: impl Into<String>, t: Instant) {
        let outcome = if pass { Outcome::Pass } else { Outcome::Fail };
        self.push(op, params, value, baseline, outcome, note, t.elapsed().as_millis());
    }

    pub fn reject(&mut self, op: &str, params: BTreeMap<String, f64>, reason: impl Into<String>) {
        self.push(op, params, f64::NAN, None, Outcome::Rejected, reason, 0);
    }

    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.outcome == Outcome::Fail).count()
    }

    /// Write `reports.csv`, `reports.jsonl` and `metadata.json` under `dir`.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut csv = csv::Writer::from_path(dir.join("reports.csv"))?;
        csv.write_record(["suite", "op", "params", "value", "baseline", "outcome", "seed", "note"])?;
        for r in &self.records {
            let params = r.params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";");
            let outcome = serde_json::to_value(r.outcome)?.as_str().unwrap_or_default().to_string();
            csv.write_record([
                r.suite.clone(),
                r.op.clone(),
                params,
                format!("{}", r.value),
                r.baseline.map(|b| format!("{b}")).unwrap_or_default(),
                outcome,
                r.seed.to_string(),
                r.note.clone(),
            ])?;
        }
        csv.flush()?;
        let mut jl = fs::File::create(dir.join("reports.jsonl"))?;
        for r in &self.records {
            writeln!(jl, "{}", serde_json::to_string(r)?)?;
        }
        let meta = serde_json::json!({
            "suite": self.suite,
            "seed": self.seed,
            "total_runtime_ms": self.started.elapsed().as_millis() as u64,
            "runtime_ms": self.runtimes.iter().map(|&t| t as u64).collect::<Vec<_>>(),
        });
        fs::write(dir.join("metadata.json"), serde_json::to_string_pretty(&meta)?)?;
        Ok(dir.to_path_buf())
    }
}
