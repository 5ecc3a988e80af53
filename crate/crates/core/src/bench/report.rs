//! Report records and their JSON and CSV encodings.
//!
//! JSON carries everything, including raw samples and the full config of
//! each record, and round-trips exactly. CSV has one row per record with
//! the fixed columns in [`CSV_COLUMNS`]; counters appear there only as
//! their total.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::vecbackend::OpCounters;

use super::{median, BenchConfig, BenchError, BenchTarget, Environment, RunOutput};

pub const SCHEMA: &str = "lanehash-bench/1";

pub const CSV_COLUMNS: [&str; 17] = [
    "target",
    "backend",
    "mul_mode",
    "threads",
    "tree_log2_leaves",
    "size",
    "repetitions",
    "warmup",
    "seed",
    "median_seconds",
    "min_seconds",
    "max_seconds",
    "work_items",
    "throughput",
    "throughput_unit",
    "output",
    "counter_total",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
        })
    }
}

impl FromStr for ReportFormat {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(BenchError::Config(format!("unknown output format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub target: BenchTarget,
    pub config: BenchConfig,
    pub samples_seconds: Vec<f64>,
    pub median_seconds: f64,
    pub min_seconds: f64,
    pub max_seconds: f64,
    /// Operations or hashes in one run.
    pub work_items: usize,
    pub throughput: f64,
    pub throughput_unit: String,
    /// Functional fingerprint, identical across all runs of the case.
    pub output: String,
    pub counters: Option<OpCounters>,
}

impl BenchRecord {
    pub(crate) fn from_samples(config: &BenchConfig, work_items: usize, samples: Vec<f64>, run: RunOutput) -> Self {
        let med = median(&samples);
        let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
        let max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let unit = match config.target {
            BenchTarget::Poseidon | BenchTarget::Merkle => "hashes/s",
            _ => "ops/s",
        };
        Self {
            target: config.target,
            config: config.clone(),
            samples_seconds: samples,
            median_seconds: med,
            min_seconds: min,
            max_seconds: max,
            work_items,
            throughput: if med > 0.0 { work_items as f64 / med } else { f64::MAX },
            throughput_unit: unit.into(),
            output: run.fingerprint,
            counters: run.counters,
        }
    }

    fn csv_row(&self) -> Vec<String> {
        let c = &self.config;
        vec![
            self.target.to_string(),
            c.backend.to_string(),
            c.mul_mode.to_string(),
            c.threads.to_string(),
            c.tree_log2_leaves.to_string(),
            c.effective_size().to_string(),
            c.repetitions.to_string(),
            c.warmup.to_string(),
            c.seed.to_string(),
            self.median_seconds.to_string(),
            self.min_seconds.to_string(),
            self.max_seconds.to_string(),
            self.work_items.to_string(),
            self.throughput.to_string(),
            self.throughput_unit.clone(),
            self.output.clone(),
            self.counters.map(|c| c.total().to_string()).unwrap_or_default(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema: String,
    pub environment: Environment,
    pub records: Vec<BenchRecord>,
}

impl BenchReport {
    pub fn new(environment: Environment) -> Self {
        Self {
            schema: SCHEMA.into(),
            environment,
            records: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_csv(&self) -> Result<String, BenchError> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(CSV_COLUMNS)?;
        for r in &self.records {
            w.write_record(r.csv_row())?;
        }
        let bytes = w.into_inner().map_err(|e| BenchError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }

    pub fn render(&self, format: ReportFormat) -> Result<String, BenchError> {
        match format {
            ReportFormat::Json => Ok(self.to_json()),
            ReportFormat::Csv => self.to_csv(),
        }
    }

    pub fn write_report(&self, format: ReportFormat, mut out: impl Write) -> Result<(), BenchError> {
        out.write_all(self.render(format)?.as_bytes())?;
        Ok(())
    }
}
