//! Browser bindings for the demo page in `www/`.
//!
//! Every export returns a JSON string so the page stays framework-free and
//! the same functions can be tested natively. Failures come back as
//! `{"error": "..."}` rather than exceptions.

use lanehash::merkle::MerkleBuilder;
use lanehash::poseidon::{self, Backend, PoseidonConstants};
use lanehash::rng::ElementRng;
use lanehash::vecbackend::LaneWidth;
use lanehash::whatif::{self, InstructionRatios, PowerCostModel, PowerSummary, RegisterWidth, WhatIfScenario};
use lanehash::Goldilocks;
use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Bytes packed per field element; seven bytes are always below the modulus.
const BYTES_PER_ELEMENT: usize = 7;

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).unwrap_or_else(|e| json!({ "error": e.to_string() }).to_string())
}

fn error(msg: impl ToString) -> String {
    json!({ "error": msg.to_string() }).to_string()
}

fn pack_text(text: &str) -> Vec<Goldilocks> {
    text.as_bytes()
        .chunks(BYTES_PER_ELEMENT)
        .map(|chunk| {
            let mut word = [0u8; 8];
            word[..chunk.len()].copy_from_slice(chunk);
            Goldilocks::from_canonical(u64::from_le_bytes(word))
        })
        .collect()
}

fn digest_bits(d: &poseidon::Digest) -> [u64; 4] {
    d.0.map(|e| e.value())
}

fn hamming(a: &[u64; 4], b: &[u64; 4]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones()).sum()
}

/// Hashes UTF-8 text (7 bytes per element) and reports the digest together
/// with the digest of the same text with bit `flip_bit` of its packed
/// elements inverted.
#[wasm_bindgen]
pub fn hash_text(text: &str, flip_bit: u32) -> String {
    let consts = PoseidonConstants::reference();
    let mut elems = pack_text(text);
    if elems.is_empty() {
        elems.push(Goldilocks::ZERO);
    }
    let digest = poseidon::linear_hash(&elems, &consts);
    let bit = flip_bit as usize % (elems.len() * BYTES_PER_ELEMENT * 8);
    let mut flipped = elems.clone();
    let e = &mut flipped[bit / 56];
    *e = Goldilocks::from_canonical(e.value() ^ (1 << (bit % 56)));
    let other = poseidon::linear_hash(&flipped, &consts);
    to_json(&json!({
        "elements": elems.len(),
        "digest_hex": digest.to_hex(),
        "digest_decimal": digest.to_decimal(),
        "flipped_bit": bit,
        "flipped_hex": other.to_hex(),
        "changed_bits": hamming(&digest_bits(&digest), &digest_bits(&other)),
    }))
}

/// Flips one random bit of a random leaf `trials` times and histograms how
/// many of the 256 digest bits change.
#[wasm_bindgen]
pub fn avalanche(seed: u64, trials: u32) -> String {
    if trials == 0 || trials > 5000 {
        return error("trials must be within 1..=5000");
    }
    let consts = PoseidonConstants::reference();
    let zero = [Goldilocks::ZERO; 4];
    let mut rng = ElementRng::new(seed);
    let mut histogram = vec![0u32; 33];
    let (mut changed, mut total_bits) = (0u32, 0u64);
    for _ in 0..trials {
        let leaf = rng.leaf();
        let base = poseidon::hash_block(&leaf, &zero, &consts).expect("8 elements");
        let mut flipped = leaf;
        let i = rng.below(8) as usize;
        // stay canonical: flip among the low 63 bits and retry on overflow
        loop {
            let candidate = leaf[i].value() ^ (1 << rng.below(63));
            if let Ok(v) = Goldilocks::new(candidate) {
                flipped[i] = v;
                break;
            }
        }
        let other = poseidon::hash_block(&flipped, &zero, &consts).expect("8 elements");
        let d = hamming(&digest_bits(&base), &digest_bits(&other));
        changed += u32::from(d > 0);
        total_bits += d as u64;
        histogram[(d / 8) as usize] += 1;
    }
    to_json(&json!({
        "trials": trials,
        "digests_changed": changed,
        "mean_changed_bits": total_bits as f64 / trials as f64,
        "histogram_bucket_bits": 8,
        "histogram": histogram,
    }))
}

/// Scenario table and power chain for the what-if explorer.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn whatif_table(baseline: f64, m: f64, r256: f64, r512: f64, d: f64, mu: f64, s: f64, gamma: f64) -> String {
    let run = || -> Result<String, whatif::WhatIfError> {
        let ratios = InstructionRatios::new(r256, r512, "page")?;
        let scenarios = RegisterWidth::ALL
            .iter()
            .map(|&w| WhatIfScenario::new(m, w, &ratios))
            .collect::<Result<Vec<_>, _>>()?;
        let mut report = whatif::scenario_report(baseline, &scenarios, &ratios.source)?;
        report.power = Some(PowerSummary::of(&PowerCostModel::new(d, mu, s, gamma)?));
        Ok(to_json(&report))
    };
    run().unwrap_or_else(error)
}

/// Abstract instruction counts of a Merkle build at each lane width.
#[wasm_bindgen]
pub fn op_counts(log2_leaves: u32) -> String {
    if log2_leaves > 12 {
        return error("keep the demo tree at 2^12 leaves or fewer");
    }
    let consts = PoseidonConstants::reference();
    let leaves = ElementRng::new(7).leaves(1 << log2_leaves);
    let mut rows = Vec::new();
    let mut base = None;
    for w in LaneWidth::ALL {
        let (tree, counters) = match MerkleBuilder::new()
            .backend(Backend::Counting(w))
            .build_counted(&leaves, &consts)
        {
            Ok(r) => r,
            Err(e) => return error(e),
        };
        let c = counters.expect("counting backend");
        let total = c.total();
        let base_total = *base.get_or_insert(total);
        rows.push(json!({
            "lanes": w.lanes(),
            "register_bits": w.bits(),
            "total": total,
            "ratio_to_2_lanes": total as f64 / base_total as f64,
            "classes": c.to_map(),
            "root_hex": tree.root().to_hex(),
        }));
    }
    to_json(&json!({ "leaves": 1u64 << log2_leaves, "widths": rows }))
}
