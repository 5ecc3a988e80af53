//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p lanehash --test acceptance`.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use lanehash::field::{self, WideProduct};
use lanehash::merkle::{self, Leaf, MerkleBuilder, MerkleTree};
use lanehash::poseidon::{self, Backend, PoseidonConstants, PoseidonState, DIGEST_LEN, RATE};
use lanehash::rng::ElementRng;
use lanehash::vecbackend::{LaneWidth, MulMode};
use lanehash::whatif::{
    self, cost_increment, cpu_power_uplift, datacenter_power_uplift, predict_time, InstructionRatios, MeasuredProfile,
    PowerCostModel, RegisterWidth, WhatIfScenario,
};
use lanehash::Goldilocks;
use serde_json::Value;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const VECTORS: &str = include_str!("data/poseidon_vectors.json");

const EXECUTING: [Backend; 4] = [
    Backend::Scalar,
    Backend::Lanes(LaneWidth::W2),
    Backend::Lanes(LaneWidth::W4),
    Backend::Lanes(LaneWidth::W8),
];

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn thread_counts() -> Vec<usize> {
    BTreeSet::from([1, 2, merkle::available_threads()])
        .into_iter()
        .collect()
}

fn field_oracle() -> Outcome {
    const N: usize = 100_000;
    let mut rng = ElementRng::new(1);
    let mut pairs: Vec<(u64, u64)> = Vec::with_capacity(N + 36);
    for &a in &common::BOUNDARY {
        for &b in &common::BOUNDARY {
            pairs.push((a, b));
        }
    }
    for _ in 0..N {
        pairs.push((rng.element().value(), rng.element().value()));
    }
    let mut failures = 0usize;
    for &(a, b) in &pairs {
        let (x, y) = (Goldilocks::from_canonical(a), Goldilocks::from_canonical(b));
        let wide = ((rng.next_u64() as u128) << 64) | rng.next_u64() as u128;
        let k = (b & 0xff) as u8;
        let checks = [
            field::add(x, y).value() == common::add(a, b),
            field::sub(x, y).value() == common::sub(a, b),
            field::mul(x, y).value() == common::mul(a, b),
            field::square(x).value() == common::mul(a, a),
            field::mult_72(x, k).value() == common::mul(a, k as u64),
            field::reduce_128(WideProduct::from_u128(wide)).value() == common::reduce(wide),
            field::pow7(x).value() == common::pow(a, 7),
        ];
        failures += checks.iter().filter(|&&c| !c).count();
    }
    ensure(failures == 0, || format!("{failures} mismatches"))?;
    Ok(format!(
        "{} input pairs (36 boundary) x 7 ops, 0 mismatches",
        pairs.len()
    ))
}

fn widening_multiply() -> Outcome {
    const N: usize = 100_000;
    let mut rng = ElementRng::new(2);
    let mut failures = 0;
    for _ in 0..N {
        let (a, b) = (rng.element(), rng.element());
        let direct = field::mul_wide_direct(a, b);
        failures += usize::from(field::mul_wide_split(a, b) != direct);
        failures += usize::from((direct.hi, direct.lo) != common::wide(a.value(), b.value()));
    }
    ensure(failures == 0, || format!("{failures} mismatches"))?;
    Ok(format!("{N} random pairs, split32 = direct = big-integer product"))
}

fn backend_equivalence() -> Outcome {
    let consts = PoseidonConstants::reference();
    let states = ElementRng::new(3).states(1000);
    let want: Vec<PoseidonState> = states.iter().map(|s| poseidon::permute(s, &consts)).collect();
    for backend in EXECUTING {
        for mode in [MulMode::Direct, MulMode::Split32] {
            let mut got = states.clone();
            backend.permuter_with_mode(&consts, mode).permute_many(&mut got);
            ensure(got == want, || format!("permute differs on {backend} {mode}"))?;
        }
    }
    let threads = thread_counts();
    let mut builds = 0;
    for log2 in 1..=14u32 {
        let leaves = ElementRng::new(100 + log2 as u64).leaves(1 << log2);
        let root = MerkleTree::build(&leaves, &consts).map_err(|e| e.to_string())?.root();
        for backend in EXECUTING {
            for &t in &threads {
                let got = MerkleBuilder::new()
                    .threads(t)
                    .backend(backend)
                    .build(&leaves, &consts)
                    .map_err(|e| e.to_string())?
                    .root();
                ensure(got == root, || format!("2^{log2} leaves: {backend} x{t} root differs"))?;
                builds += 1;
            }
        }
    }
    Ok(format!(
        "1000 permutations x 4 backends x 2 mul modes; {builds} Merkle builds (2^1..2^14, threads {threads:?}), 0 mismatches"
    ))
}

fn linear_layers() -> Outcome {
    const N: usize = 10_000;
    let consts = PoseidonConstants::reference();
    let dense = common::dense(consts.mds());
    let blocks = consts.partial_rounds();
    let mut rng = ElementRng::new(4);
    let mut failures = 0;
    for i in 0..N {
        let s = rng.state();
        failures += usize::from(poseidon::mds(&s, consts.mds()) != common::vec_mat(&s, &dense));
        let block = &blocks[i % blocks.len()];
        failures += usize::from(poseidon::mds_partial(&s, block) != common::vec_mat(&s, &common::sparse(block)));
    }
    ensure(failures == 0, || format!("{failures} mismatches"))?;
    Ok(format!(
        "{N} states: mds = dense product, mds_partial = sparse-matrix product"
    ))
}

fn parse_elems(v: &Value) -> Vec<Goldilocks> {
    v.as_array()
        .expect("array")
        .iter()
        .map(|x| x.as_str().expect("decimal string").parse().expect("canonical"))
        .collect()
}

fn poseidon_vectors() -> Outcome {
    let consts = PoseidonConstants::reference();
    let doc: Value = serde_json::from_str(VECTORS).map_err(|e| e.to_string())?;
    let perms = doc["permute"].as_array().ok_or("no permute vectors")?;
    let blocks = doc["hash_block"].as_array().ok_or("no hash_block vectors")?;
    ensure(
        parse_elems(&perms[0]["input"]).iter().all(|e| *e == Goldilocks::ZERO),
        || "first permute vector is not the zero state".into(),
    )?;
    let inputs: Vec<PoseidonState> = perms
        .iter()
        .map(|v| parse_elems(&v["input"]).try_into().unwrap())
        .collect();
    let outputs: Vec<PoseidonState> = perms
        .iter()
        .map(|v| parse_elems(&v["output"]).try_into().unwrap())
        .collect();
    for backend in EXECUTING {
        let mut got = inputs.clone();
        backend.permuter(&consts).permute_many(&mut got);
        ensure(got == outputs, || format!("permute vectors differ on {backend}"))?;
    }
    for (i, v) in blocks.iter().enumerate() {
        let cap: [Goldilocks; DIGEST_LEN] = parse_elems(&v["capacity"]).try_into().unwrap();
        let got = poseidon::hash_block(&parse_elems(&v["input"]), &cap, &consts).map_err(|e| e.to_string())?;
        ensure(got.0.to_vec() == parse_elems(&v["digest"]), || {
            format!("hash_block vector {i} differs")
        })?;
    }
    Ok(format!(
        "{} permute and {} hash_block vectors (zero state first, constants {}) match exactly",
        perms.len(),
        blocks.len(),
        consts.id()
    ))
}

fn merkle_scale() -> Outcome {
    const LOG2: u32 = 20;
    let consts = PoseidonConstants::reference();
    let leaves: Vec<Leaf> = ElementRng::new(6).leaves(1 << LOG2);
    let max = merkle::available_threads();
    let runs = [
        (Backend::Scalar, 1),
        (Backend::Lanes(LaneWidth::W4), 2),
        (Backend::Lanes(LaneWidth::W8), max),
    ];
    let mut timings = Vec::new();
    let mut reference: Option<MerkleTree> = None;
    for (backend, threads) in runs {
        let start = Instant::now();
        let tree = MerkleBuilder::new()
            .threads(threads)
            .backend(backend)
            .build(&leaves, &consts)
            .map_err(|e| e.to_string())?;
        timings.push(format!("{backend} x{threads} {:.1}s", start.elapsed().as_secs_f64()));
        match &reference {
            None => reference = Some(tree),
            Some(r) => ensure(r.root() == tree.root(), || format!("{backend} x{threads} root differs"))?,
        }
    }
    let tree = reference.expect("at least one build");
    ensure(tree.nodes().len() == (2 << LOG2) - 1, || {
        "node count is not 2n - 1".into()
    })?;
    let mut rng = ElementRng::new(60);
    for _ in 0..100 {
        let i = rng.below(1 << LOG2) as usize;
        let proof = tree.prove(i).map_err(|e| e.to_string())?;
        ensure(merkle::verify(&tree.root(), &leaves[i], &proof, &consts), || {
            format!("proof {i} rejected")
        })?;
        let mut wrong = leaves[i];
        wrong[0] += Goldilocks::ONE;
        ensure(!merkle::verify(&tree.root(), &wrong, &proof, &consts), || {
            format!("proof {i} accepts a wrong leaf")
        })?;
    }
    Ok(format!(
        "2^20 leaves, root {}..., {}; 100 proofs round-trip",
        &tree.root().to_hex()[..16],
        timings.join(", ")
    ))
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn whatif_arithmetic() -> Outcome {
    let base = PowerCostModel::default();
    let cpu = cpu_power_uplift(&base);
    let dc = datacenter_power_uplift(&base);
    let c5 = cost_increment(&base) * 100.0;
    let c20 = cost_increment(&base.with_gamma(0.2).map_err(|e| e.to_string())?) * 100.0;
    ensure(close(cpu, 1.8, 1e-12), || format!("cpu uplift {cpu}"))?;
    ensure(close(dc, 1.488, 1e-12), || format!("datacenter uplift {dc}"))?;
    ensure(close(c5, 2.44, 0.005), || format!("cost at 5% energy share {c5}"))?;
    ensure(close(c20, 9.76, 0.005), || format!("cost at 20% energy share {c20}"))?;
    ensure(
        whatif::round_percent(c5) == 2.44 && whatif::round_percent(c20) == 9.76,
        || "rounded cost".into(),
    )?;

    let ratios = InstructionRatios::default();
    let profile = MeasuredProfile::new(3.0e9, 2.0e9, 2.8e9).map_err(|e| e.to_string())?;
    let t = profile.time();
    let scenario = |m: f64, w| WhatIfScenario::new(m, w, &ratios).map_err(|e| e.to_string());
    let t1 = predict_time(&profile, &scenario(1.0, RegisterWidth::W128)?);
    let t2 = predict_time(&profile, &scenario(2.0, RegisterWidth::W128)?);
    ensure(t1 == t && t2 * 2.0 == t, || {
        format!("m=2 gives {t2}, expected {}", t / 2.0)
    })?;
    let t256 = predict_time(&profile, &scenario(1.0, RegisterWidth::W256)?);
    let t512 = predict_time(&profile, &scenario(1.0, RegisterWidth::W512)?);
    ensure(t256 == t * 0.543 && t512 == t * 0.453, || {
        format!("rho applied wrongly: {t256} {t512}")
    })?;
    Ok(format!(
        "cpu {cpu}, datacenter {dc}, cost +{:.2}% / +{:.2}%, m=2 halves T, rho 256/512 = 0.543/0.453",
        c5, c20
    ))
}

fn fig8_consistency() -> Outcome {
    let ratios = InstructionRatios::default();
    let s = WhatIfScenario::clock_change(2.8, 3.7, RegisterWidth::W128, &ratios).map_err(|e| e.to_string())?;
    let report = whatif::scenario_report(0.75, &[s], "acceptance").map_err(|e| e.to_string())?;
    let a = &report.rows[0];
    let report = whatif::scenario_report(0.71, &[s], "acceptance").map_err(|e| e.to_string())?;
    let b = &report.rows[0];
    ensure(
        close(a.normalized_time, 0.57, 0.01) && close(a.improvement_percent, 43.0, 1.0),
        || format!("25% case gives {} ({}%)", a.normalized_time, a.improvement_percent),
    )?;
    ensure(
        close(b.normalized_time, 0.54, 0.01) && close(b.improvement_percent, 46.0, 1.0),
        || format!("29% case gives {} ({}%)", b.normalized_time, b.improvement_percent),
    )?;
    Ok(format!(
        "0.75 -> {:.4} ({}% faster), 0.71 -> {:.4} ({}% faster) at 2.8 -> 3.7 GHz",
        a.normalized_time, a.improvement_percent, b.normalized_time, b.improvement_percent
    ))
}

fn counting_backend() -> Outcome {
    let consts = PoseidonConstants::reference();
    let leaves = ElementRng::new(9).leaves(1 << 10);
    let mut totals = Vec::new();
    for w in LaneWidth::ALL {
        let (_, c) = MerkleBuilder::new()
            .backend(Backend::Counting(w))
            .build_counted(&leaves, &consts)
            .map_err(|e| e.to_string())?;
        totals.push(c.ok_or("counting backend reported no counters")?.total());
    }
    let (w2, w4, w8) = (totals[0], totals[1], totals[2]);
    ensure(w4 < w2 && w8 < w4, || format!("totals not decreasing: {totals:?}"))?;
    let r = InstructionRatios::from_counts(w2, w4, w8).map_err(|e| e.to_string())?;
    let published = InstructionRatios::default();
    Ok(format!(
        "2^10-leaf build: W2 {w2}, W4 {w4}, W8 {w8}; abstract reduction {:.1}% / {:.1}% vs published whole-program {:.1}% / {:.1}% (vector ops only, so they differ)",
        (1.0 - r.r256) * 100.0,
        (1.0 - r.r512) * 100.0,
        (1.0 - published.r256) * 100.0,
        (1.0 - published.r512) * 100.0
    ))
}

fn flip_bit(rng: &mut ElementRng, x: Goldilocks) -> Goldilocks {
    loop {
        if let Ok(v) = Goldilocks::new(x.value() ^ (1 << rng.below(64))) {
            return v;
        }
    }
}

fn avalanche() -> Outcome {
    let consts = PoseidonConstants::reference();
    let mut rng = ElementRng::new(10);
    let leaves = rng.leaves(16);
    let root = MerkleTree::build(&leaves, &consts).map_err(|e| e.to_string())?.root();
    let mut changed = 0;
    for _ in 0..1000 {
        let mut mutated = leaves.clone();
        let (l, j) = (rng.below(16) as usize, rng.below(RATE as u64) as usize);
        mutated[l][j] = flip_bit(&mut rng, mutated[l][j]);
        changed += usize::from(MerkleTree::build(&mutated, &consts).map_err(|e| e.to_string())?.root() != root);
    }
    ensure(changed >= 990, || format!("only {changed}/1000 roots changed"))?;
    Ok(format!("{changed}/1000 single-bit leaf flips changed the root"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("field oracle equivalence", field_oracle),
        ("widening-multiply equivalence", widening_multiply),
        ("backend bit-equivalence", backend_equivalence),
        ("linear-layer oracles", linear_layers),
        ("poseidon vectors", poseidon_vectors),
        ("merkle scale check", merkle_scale),
        ("what-if arithmetic", whatif_arithmetic),
        ("clock-scaling consistency", fig8_consistency),
        ("counting backend", counting_backend),
        ("avalanche", avalanche),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} [{secs:.1}s]: {detail}", i + 1),
            Err(reason) => {
                failed += 1;
                println!("FAIL {:>2} {name} [{secs:.1}s]: {reason}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
