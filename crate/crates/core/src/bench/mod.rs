//! Timing harness for the basic field and matrix functions, the Poseidon
//! permutation and Merkle builds.
//!
//! A [`BenchConfig`] describes one case (or, with [`BenchTarget::Table1`],
//! the ten basic functions in a row). Inputs are drawn once per case from
//! the seeded stream in [`crate::rng`]; then `warmup` untimed runs and
//! `repetitions` timed runs follow. Each run produces a functional
//! fingerprint (a digest of every output word, or the Merkle root) and the
//! case fails if two runs disagree. Timings are summarized by median, min
//! and max; counting backends also attach the instruction totals of one run.

mod env;
mod report;
mod runners;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::merkle::{MerkleError, MAX_LOG2_LEAVES};
use crate::poseidon::{Backend, PoseidonConstants};
use crate::vecbackend::{MulMode, OpCounters};

pub use env::Environment;
pub use report::{BenchRecord, BenchReport, ReportFormat, CSV_COLUMNS};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid bench config: {0}")]
    Config(String),
    #[error("tree of 2^{0} leaves exceeds the 2^{MAX_LOG2_LEAVES} memory guard")]
    TreeTooLarge(u32),
    #[error("unknown bench target {0:?}")]
    UnknownTarget(String),
    #[error("run {run} of {target} produced {found}, earlier runs produced {expected}")]
    Nondeterministic {
        target: String,
        run: usize,
        expected: String,
        found: String,
    },
    #[error(transparent)]
    Merkle(#[from] MerkleError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// The ten basic functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldOp {
    Add,
    Sub,
    #[serde(rename = "reduce_128_64")]
    Reduce128,
    #[serde(rename = "square_128")]
    Square128,
    #[serde(rename = "mult_128")]
    Mult128,
    #[serde(rename = "mult_72")]
    Mult72,
    #[serde(rename = "spmv_4x12")]
    Spmv4x12,
    #[serde(rename = "spmv_4x12_8")]
    Spmv4x12U8,
    #[serde(rename = "mmult_4x12")]
    Mmult4x12,
    #[serde(rename = "mmult_4x12_8")]
    Mmult4x12U8,
}

impl FieldOp {
    pub const ALL: [FieldOp; 10] = [
        FieldOp::Add,
        FieldOp::Sub,
        FieldOp::Reduce128,
        FieldOp::Square128,
        FieldOp::Mult128,
        FieldOp::Mult72,
        FieldOp::Spmv4x12,
        FieldOp::Spmv4x12U8,
        FieldOp::Mmult4x12,
        FieldOp::Mmult4x12U8,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FieldOp::Add => "add",
            FieldOp::Sub => "sub",
            FieldOp::Reduce128 => "reduce_128_64",
            FieldOp::Square128 => "square_128",
            FieldOp::Mult128 => "mult_128",
            FieldOp::Mult72 => "mult_72",
            FieldOp::Spmv4x12 => "spmv_4x12",
            FieldOp::Spmv4x12U8 => "spmv_4x12_8",
            FieldOp::Mmult4x12 => "mmult_4x12",
            FieldOp::Mmult4x12U8 => "mmult_4x12_8",
        }
    }

    pub fn is_matrix(self) -> bool {
        matches!(
            self,
            FieldOp::Spmv4x12 | FieldOp::Spmv4x12U8 | FieldOp::Mmult4x12 | FieldOp::Mmult4x12U8
        )
    }
}

/// What a case measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BenchTarget {
    Field(FieldOp),
    /// All ten [`FieldOp`]s, one record each.
    Table1,
    Poseidon,
    Merkle,
}

impl BenchTarget {
    pub fn name(self) -> &'static str {
        match self {
            BenchTarget::Field(op) => op.name(),
            BenchTarget::Table1 => "table1",
            BenchTarget::Poseidon => "poseidon",
            BenchTarget::Merkle => "merkle",
        }
    }

    fn expand(self) -> Vec<BenchTarget> {
        match self {
            BenchTarget::Table1 => FieldOp::ALL.map(BenchTarget::Field).to_vec(),
            t => vec![t],
        }
    }
}

impl fmt::Display for BenchTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchTarget {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "table1" | "all" => return Ok(BenchTarget::Table1),
            "poseidon" => return Ok(BenchTarget::Poseidon),
            "merkle" => return Ok(BenchTarget::Merkle),
            _ => {}
        }
        FieldOp::ALL
            .into_iter()
            .find(|op| op.name() == lower)
            .map(BenchTarget::Field)
            .ok_or_else(|| BenchError::UnknownTarget(s.to_string()))
    }
}

impl Serialize for BenchTarget {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for BenchTarget {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub target: BenchTarget,
    pub backend: Backend,
    pub mul_mode: MulMode,
    pub threads: usize,
    pub tree_log2_leaves: u32,
    /// Operations per run for field, matrix and Poseidon targets. `None`
    /// picks a per-target default; Merkle cases use `tree_log2_leaves`.
    pub size: Option<usize>,
    pub repetitions: usize,
    pub warmup: usize,
    pub output: ReportFormat,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            target: BenchTarget::Poseidon,
            backend: Backend::Scalar,
            mul_mode: MulMode::Direct,
            threads: 1,
            tree_log2_leaves: 16,
            size: None,
            repetitions: 5,
            warmup: 2,
            output: ReportFormat::Json,
            seed: 0x5EED,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.repetitions < 3 {
            return Err(BenchError::Config(format!(
                "repetitions must be at least 3, got {}",
                self.repetitions
            )));
        }
        if self.threads == 0 {
            return Err(BenchError::Config("threads must be positive".into()));
        }
        if self.size == Some(0) {
            return Err(BenchError::Config("size must be positive".into()));
        }
        if self.target == BenchTarget::Merkle && self.tree_log2_leaves > MAX_LOG2_LEAVES {
            return Err(BenchError::TreeTooLarge(self.tree_log2_leaves));
        }
        Ok(())
    }

    /// Operations one run performs.
    pub fn effective_size(&self) -> usize {
        match (self.target, self.size) {
            (BenchTarget::Merkle, _) => 1 << self.tree_log2_leaves,
            (_, Some(n)) => n,
            (BenchTarget::Poseidon, None) => 1 << 11,
            (BenchTarget::Field(op), None) if op.is_matrix() => 1 << 13,
            _ => 1 << 16,
        }
    }
}

/// Result of one untimed-or-timed execution of a case.
pub(crate) struct RunOutput {
    pub fingerprint: String,
    pub counters: Option<OpCounters>,
}

/// Runs every case the config describes and returns one record per case.
pub fn run_bench(config: &BenchConfig) -> Result<BenchReport, BenchError> {
    let consts = PoseidonConstants::reference();
    run_bench_with(config, &consts)
}

pub fn run_bench_with(config: &BenchConfig, consts: &PoseidonConstants) -> Result<BenchReport, BenchError> {
    config.validate()?;
    let mut report = BenchReport::new(Environment::capture());
    for target in config.target.expand() {
        let case = BenchConfig {
            target,
            ..config.clone()
        };
        report.records.push(run_case(&case, consts)?);
    }
    Ok(report)
}

fn run_case(config: &BenchConfig, consts: &PoseidonConstants) -> Result<BenchRecord, BenchError> {
    let mut case = runners::Case::prepare(config, consts);
    for _ in 0..config.warmup {
        case.execute()?;
    }
    let mut samples = Vec::with_capacity(config.repetitions);
    let mut first: Option<RunOutput> = None;
    for run in 0..config.repetitions {
        let start = Instant::now();
        let counters = case.execute()?;
        samples.push(start.elapsed().as_secs_f64());
        let out = RunOutput {
            fingerprint: case.fingerprint(),
            counters,
        };
        match &first {
            None => first = Some(out),
            Some(f) if f.fingerprint != out.fingerprint => {
                return Err(BenchError::Nondeterministic {
                    target: config.target.to_string(),
                    run,
                    expected: f.fingerprint.clone(),
                    found: out.fingerprint,
                })
            }
            Some(_) => {}
        }
    }
    let first = first.expect("at least three repetitions");
    Ok(BenchRecord::from_samples(config, case.work_items(), samples, first))
}

/// Median of a non-empty sample; mean of the middle pair for even counts.
pub fn median(samples: &[f64]) -> f64 {
    assert!(!samples.is_empty());
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let mid = s.len() / 2;
    if s.len() % 2 == 1 {
        s[mid]
    } else {
        (s[mid - 1] + s[mid]) / 2.0
    }
}
