//! `lanehash` command-line tool.
//!
//! Every failure prints one JSON object on stderr,
//! `{"error":{"kind":...,"message":...}}`, and exits nonzero: 1 for runtime
//! failures (including a proof that does not verify), 2 for usage errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "lanehash",
    version,
    about = "Goldilocks/Poseidon Merkle tooling and performance model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Time basic functions, Poseidon or Merkle builds and emit a report.
    Bench(BenchArgs),
    /// Build a Merkle tree from a leaf file and print its root.
    MerkleRoot(MerkleRootArgs),
    /// Emit the authentication path of one leaf as JSON.
    Prove(ProveArgs),
    /// Check a proof against a root and a leaf.
    Verify(VerifyArgs),
    /// Evaluate frequency/register-width scenarios and the power/cost chain.
    Whatif(WhatifArgs),
}

#[derive(Debug, Args)]
struct ConstantsArg {
    /// Constants JSON file; the bundled set when omitted.
    #[arg(long)]
    constants: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// add, sub, reduce_128_64, square_128, mult_128, mult_72, spmv_4x12,
    /// spmv_4x12_8, mmult_4x12, mmult_4x12_8, table1, poseidon or merkle.
    #[arg(long, default_value = "poseidon")]
    target: String,
    /// scalar, w2, w4, w8 or counting-w2/w4/w8.
    #[arg(long, default_value = "scalar")]
    backend: String,
    /// direct or split32.
    #[arg(long, default_value = "direct")]
    mul_mode: String,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long, default_value_t = 16)]
    tree_log2_leaves: u32,
    /// Operations per run (field, matrix and Poseidon targets).
    #[arg(long)]
    size: Option<usize>,
    #[arg(long, default_value_t = 5)]
    repetitions: usize,
    #[arg(long, default_value_t = 2)]
    warmup: usize,
    /// json or csv.
    #[arg(long, default_value = "json")]
    output: String,
    #[arg(long, default_value_t = 0x5EED)]
    seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the summed instruction counters as {op_class: count}.
    #[arg(long)]
    counters: Option<PathBuf>,
    #[command(flatten)]
    constants: ConstantsArg,
}

#[derive(Debug, Args)]
struct LeafSource {
    /// Raw little-endian u64 words, 8 per leaf.
    #[arg(long, conflicts_with = "random_log2")]
    leaves: Option<PathBuf>,
    /// Use 2^N seeded pseudorandom leaves instead of a file.
    #[arg(long)]
    random_log2: Option<u32>,
    #[arg(long, default_value_t = 0x5EED)]
    seed: u64,
}

#[derive(Debug, Args)]
struct TreeArgs {
    #[command(flatten)]
    source: LeafSource,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long, default_value = "scalar")]
    backend: String,
    #[command(flatten)]
    constants: ConstantsArg,
}

#[derive(Debug, Args)]
struct MerkleRootArgs {
    #[command(flatten)]
    tree: TreeArgs,
    /// Print a JSON object instead of the two-line text form.
    #[arg(long)]
    json: bool,
    /// Also write the leaves used to this file (useful with --random-log2).
    #[arg(long)]
    save_leaves: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ProveArgs {
    #[command(flatten)]
    tree: TreeArgs,
    #[arg(long)]
    index: usize,
    /// Write the proof here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// 64 hex chars, or 4 comma-separated decimals.
    #[arg(long)]
    root: String,
    /// Proof JSON file.
    #[arg(long)]
    proof: PathBuf,
    /// The leaf as 8 comma-separated decimals.
    #[arg(long, conflicts_with = "leaves")]
    leaf: Option<String>,
    /// Leaf file to take the proof's leaf from.
    #[arg(long)]
    leaves: Option<PathBuf>,
    #[command(flatten)]
    constants: ConstantsArg,
}

#[derive(Debug, Args)]
struct WhatifArgs {
    /// Measured time relative to the reference machine.
    #[arg(long, default_value_t = 1.0)]
    baseline: f64,
    /// Frequency multiplier.
    #[arg(long, conflicts_with = "clock")]
    m: Option<f64>,
    /// Clock change as FROM:TO in GHz, e.g. 2.8:3.7.
    #[arg(long)]
    clock: Option<String>,
    /// Register widths in bits; repeat or comma-separate. All three by default.
    #[arg(long, value_delimiter = ',')]
    width: Vec<u32>,
    /// Instruction ratios: `published` or `measured` (counting-backend Merkle build).
    #[arg(long, default_value = "published")]
    ratios: String,
    #[arg(long)]
    r256: Option<f64>,
    #[arg(long)]
    r512: Option<f64>,
    /// Tree size for `--ratios measured`.
    #[arg(long, default_value_t = 10)]
    measure_log2: u32,
    #[arg(long, default_value_t = 0.8)]
    d: f64,
    #[arg(long, default_value_t = 2.0)]
    mu: f64,
    #[arg(long, default_value_t = 0.61)]
    s: f64,
    #[arg(long, default_value_t = 0.05)]
    gamma: f64,
    /// json or csv.
    #[arg(long, default_value = "json")]
    output: String,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e)
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return report(&CliError::Usage(e.to_string().trim().to_string())),
    };
    let result = match cli.command {
        Command::Bench(a) => commands::bench(a),
        Command::MerkleRoot(a) => commands::merkle_root(a),
        Command::Prove(a) => commands::prove(a),
        Command::Verify(a) => commands::verify(a),
        Command::Whatif(a) => commands::whatif(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e),
    }
}

fn report(e: &CliError) -> ExitCode {
    eprintln!("{}", e.to_json_line());
    ExitCode::from(e.exit_code())
}
