use std::fs;
use std::io::Write;
use std::path::Path;

use lanehash::bench::{self, BenchConfig, BenchError, ReportFormat};
use lanehash::merkle::{self, Leaf, MerkleBuilder, MerkleError, MerkleProof, MerkleTree, MAX_LOG2_LEAVES};
use lanehash::poseidon::{Backend, ConstantsError, Digest, PoseidonConstants};
use lanehash::rng::ElementRng;
use lanehash::vecbackend::{LaneWidth, OpCounters};
use lanehash::whatif::{self, InstructionRatios, PowerCostModel, RegisterWidth, WhatIfError, WhatIfScenario};
use lanehash::Goldilocks;
use thiserror::Error;

use crate::{BenchArgs, ConstantsArg, MerkleRootArgs, ProveArgs, TreeArgs, VerifyArgs, WhatifArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Constants(#[from] ConstantsError),
    #[error(transparent)]
    Merkle(#[from] MerkleError),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error(transparent)]
    WhatIf(#[from] WhatIfError),
    #[error("proof does not verify against the given root")]
    VerificationFailed,
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Constants(_) => "constants",
            CliError::Merkle(_) => "merkle",
            CliError::Bench(_) => "bench",
            CliError::WhatIf(_) => "whatif",
            CliError::VerificationFailed => "verification_failed",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::json!({ "error": { "kind": self.kind(), "message": self.to_string() } }).to_string()
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => write(p, text.as_bytes()),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

fn constants(arg: &ConstantsArg) -> Result<PoseidonConstants, CliError> {
    match &arg.constants {
        Some(p) => Ok(PoseidonConstants::load(p)?),
        None => Ok(PoseidonConstants::reference()),
    }
}

fn backend(s: &str) -> Result<Backend, CliError> {
    s.parse()
        .map_err(|e: lanehash::poseidon::PoseidonError| usage(e.to_string()))
}

pub fn bench(a: BenchArgs) -> Result<(), CliError> {
    let config = BenchConfig {
        target: a.target.parse()?,
        backend: backend(&a.backend)?,
        mul_mode: a
            .mul_mode
            .parse()
            .map_err(|e: lanehash::vecbackend::LaneError| usage(e.to_string()))?,
        threads: a.threads,
        tree_log2_leaves: a.tree_log2_leaves,
        size: a.size,
        repetitions: a.repetitions,
        warmup: a.warmup,
        output: a.output.parse()?,
        seed: a.seed,
    };
    let consts = constants(&a.constants)?;
    let report = bench::run_bench_with(&config, &consts)?;
    if let Some(path) = &a.counters {
        let mut total = OpCounters::default();
        for c in report.records.iter().filter_map(|r| r.counters) {
            total += c;
        }
        let text = serde_json::to_string_pretty(&total.to_map()).expect("map serializes") + "\n";
        write(path, text.as_bytes())?;
    }
    emit(a.out.as_deref(), &report.render(config.output)?)
}

fn load_leaves(t: &TreeArgs) -> Result<Vec<Leaf>, CliError> {
    match (&t.source.leaves, t.source.random_log2) {
        (Some(path), _) => Ok(merkle::leaves_from_bytes(&read(path)?)?),
        (None, Some(log2)) if log2 > MAX_LOG2_LEAVES => Err(MerkleError::TooLarge(log2).into()),
        (None, Some(log2)) => Ok(ElementRng::new(t.source.seed).leaves(1 << log2)),
        (None, None) => Err(usage("one of --leaves or --random-log2 is required")),
    }
}

fn build(t: &TreeArgs, leaves: &[Leaf], consts: &PoseidonConstants) -> Result<MerkleTree, CliError> {
    Ok(MerkleBuilder::new()
        .threads(t.threads)
        .backend(backend(&t.backend)?)
        .build(leaves, consts)?)
}

pub fn merkle_root(a: MerkleRootArgs) -> Result<(), CliError> {
    let consts = constants(&a.tree.constants)?;
    let leaves = load_leaves(&a.tree)?;
    if let Some(path) = &a.save_leaves {
        write(path, &merkle::leaves_to_bytes(&leaves))?;
    }
    let tree = build(&a.tree, &leaves, &consts)?;
    let root = tree.root();
    let text = if a.json {
        let decimal: Vec<String> = root.elements().iter().map(|e| e.to_string()).collect();
        serde_json::to_string_pretty(&serde_json::json!({
            "leaf_count": tree.leaf_count(),
            "constants_id": tree.constants_id(),
            "root_decimal": decimal,
            "root_hex": root.to_hex(),
        }))
        .expect("json")
            + "\n"
    } else {
        format!("{}\n{}\n", root.to_decimal(), root.to_hex())
    };
    emit(None, &text)
}

pub fn prove(a: ProveArgs) -> Result<(), CliError> {
    let consts = constants(&a.tree.constants)?;
    let leaves = load_leaves(&a.tree)?;
    let tree = build(&a.tree, &leaves, &consts)?;
    let proof = tree.prove(a.index)?;
    emit(a.out.as_deref(), &(proof.to_json() + "\n"))
}

fn parse_elements<const N: usize>(s: &str, what: &str) -> Result<[Goldilocks; N], CliError> {
    let parts: Vec<&str> = s.split([',', ' ']).filter(|p| !p.is_empty()).collect();
    if parts.len() != N {
        return Err(usage(format!("{what} needs {N} elements, got {}", parts.len())));
    }
    let mut out = [Goldilocks::ZERO; N];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p
            .parse()
            .map_err(|e: lanehash::field::FieldError| usage(format!("{what}: {e}")))?;
    }
    Ok(out)
}

fn parse_root(s: &str) -> Result<Digest, CliError> {
    let t = s.trim();
    if t.len() == 64 && t.chars().all(|c| c.is_ascii_hexdigit()) {
        Digest::from_hex(t).map_err(|e| usage(format!("root: {e}")))
    } else {
        parse_elements::<4>(t, "root").map(Digest)
    }
}

pub fn verify(a: VerifyArgs) -> Result<(), CliError> {
    let consts = constants(&a.constants)?;
    let root = parse_root(&a.root)?;
    let text = String::from_utf8(read(&a.proof)?).map_err(|_| usage("proof file is not UTF-8"))?;
    let proof = MerkleProof::from_json(&text)?;
    let leaf: Leaf = match (&a.leaf, &a.leaves) {
        (Some(s), _) => parse_elements::<8>(s, "leaf")?,
        (None, Some(path)) => {
            let leaves = merkle::leaves_from_bytes(&read(path)?)?;
            *leaves.get(proof.leaf_index).ok_or(MerkleError::IndexOutOfRange {
                index: proof.leaf_index,
                leaf_count: leaves.len(),
            })?
        }
        (None, None) => return Err(usage("one of --leaf or --leaves is required")),
    };
    if merkle::verify(&root, &leaf, &proof, &consts) {
        emit(
            None,
            &format!(
                "{}\n",
                serde_json::json!({ "valid": true, "leaf_index": proof.leaf_index })
            ),
        )
    } else {
        Err(CliError::VerificationFailed)
    }
}

fn measured_ratios(log2: u32) -> Result<InstructionRatios, CliError> {
    if log2 > 16 {
        return Err(usage("--measure-log2 above 16 is needlessly slow for a ratio"));
    }
    let consts = PoseidonConstants::reference();
    let leaves = ElementRng::new(1).leaves(1 << log2);
    let mut totals = [0u64; 3];
    for (slot, w) in totals.iter_mut().zip(LaneWidth::ALL) {
        let (_, counters) = MerkleBuilder::new()
            .backend(Backend::Counting(w))
            .build_counted(&leaves, &consts)?;
        *slot = counters.expect("counting backend reports counters").total();
    }
    Ok(InstructionRatios::from_counts(totals[0], totals[1], totals[2])?)
}

pub fn whatif(a: WhatifArgs) -> Result<(), CliError> {
    let mut ratios = match a.ratios.as_str() {
        "published" => InstructionRatios::default(),
        "measured" => measured_ratios(a.measure_log2)?,
        other => {
            return Err(usage(format!(
                "unknown --ratios {other:?} (expected published or measured)"
            )))
        }
    };
    if a.r256.is_some() || a.r512.is_some() {
        ratios = InstructionRatios::new(
            a.r256.unwrap_or(ratios.r256),
            a.r512.unwrap_or(ratios.r512),
            "command line",
        )?;
    }
    let m = match (&a.m, &a.clock) {
        (Some(m), _) => *m,
        (None, Some(clock)) => {
            let (from, to) = clock
                .split_once(':')
                .ok_or_else(|| usage("--clock expects FROM:TO, e.g. 2.8:3.7"))?;
            let parse = |x: &str| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|_| usage(format!("bad clock value {x:?}")))
            };
            parse(to)? / parse(from)?
        }
        (None, None) => 1.0,
    };
    let widths = if a.width.is_empty() {
        RegisterWidth::ALL.to_vec()
    } else {
        a.width
            .iter()
            .map(|&b| RegisterWidth::from_bits(b))
            .collect::<Result<_, _>>()?
    };
    let scenarios = widths
        .into_iter()
        .map(|w| WhatIfScenario::new(m, w, &ratios))
        .collect::<Result<Vec<_>, _>>()?;
    let model = PowerCostModel::new(a.d, a.mu, a.s, a.gamma)?;
    let mut report = whatif::scenario_report(a.baseline, &scenarios, &ratios.source)?;
    report.power = Some(whatif::PowerSummary::of(&model));
    let text = match a.output.parse::<ReportFormat>()? {
        ReportFormat::Json => report.to_json(),
        ReportFormat::Csv => report.to_csv()?,
    };
    emit(None, &text)
}
