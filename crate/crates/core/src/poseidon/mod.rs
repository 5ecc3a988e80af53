//! Poseidon over a 12-element Goldilocks state: 8 rate + 4 capacity
//! elements, 4 + 4 full rounds around 22 partial rounds, `x^7` S-box.
//!
//! Round structure:
//!
//! ```text
//! state += C[0]
//! 4x  { sbox(all); state = state x M; state += C[k] }
//! 22x { state[0] = sbox(state[0]); sparse partial layer S[r] }
//! 4x  { sbox(all); state = state x M; state += C[k] }
//! ```
//!
//! The partial layer computes `tmp = state . v0`, adds `state[0] * v1` to
//! the whole state, then overwrites `state[0]` with `tmp`.
//!
//! The free functions below are the scalar path. [`Backend`] picks between
//! it and the lane engines in [`lanes`], which produce identical output.

mod constants;
pub mod kernels;
pub mod lanes;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::field::{self, Goldilocks};
use crate::vecbackend::{LaneWidth, MulMode, OpCounters};

pub use constants::{
    ConstantsError, MdsMatrix, PartialRoundConstants, PoseidonConstants, HALF_FULL_ROUNDS, PARTIAL_ROUNDS,
    ROUND_CONSTANT_BLOCKS,
};
pub use kernels::{mmult_4x12, mmult_4x12_8, spmv_4x12, spmv_4x12_8};

pub const WIDTH: usize = 12;
pub const RATE: usize = 8;
pub const DIGEST_LEN: usize = 4;

pub type PoseidonState = [Goldilocks; WIDTH];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PoseidonError {
    #[error("hash block needs exactly {RATE} input elements, got {0}")]
    BlockLength(usize),
    #[error("invalid digest encoding: {0}")]
    DigestEncoding(String),
    #[error("unknown backend {0:?} (expected scalar, w2, w4, w8 or counting-w2/w4/w8)")]
    UnknownBackend(String),
}

/// Four field elements; the first four state words after a permutation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Digest(pub [Goldilocks; DIGEST_LEN]);

impl Digest {
    pub fn elements(&self) -> &[Goldilocks; DIGEST_LEN] {
        &self.0
    }

    pub fn to_bytes(&self) -> [u8; 32] {
        let mut out = [0u8; 32];
        for (chunk, e) in out.chunks_exact_mut(8).zip(&self.0) {
            chunk.copy_from_slice(&e.to_le_bytes());
        }
        out
    }

    /// 64 hex characters: the little-endian bytes of each element, in order.
    pub fn to_hex(&self) -> String {
        self.to_bytes().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_hex(s: &str) -> Result<Self, PoseidonError> {
        let s = s.trim();
        if s.len() != 64 || !s.is_ascii() {
            return Err(PoseidonError::DigestEncoding(format!(
                "expected 64 hex chars, got {:?}",
                s
            )));
        }
        let mut bytes = [0u8; 32];
        for (i, b) in bytes.iter_mut().enumerate() {
            *b = u8::from_str_radix(&s[2 * i..2 * i + 2], 16)
                .map_err(|_| PoseidonError::DigestEncoding(format!("bad hex byte at {i}")))?;
        }
        let mut out = [Goldilocks::ZERO; DIGEST_LEN];
        for (e, chunk) in out.iter_mut().zip(bytes.chunks_exact(8)) {
            *e = Goldilocks::from_le_bytes(chunk).map_err(|e| PoseidonError::DigestEncoding(e.to_string()))?;
        }
        Ok(Self(out))
    }

    /// Space-separated decimal elements.
    pub fn to_decimal(&self) -> String {
        self.0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" ")
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl FromStr for Digest {
    type Err = PoseidonError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::from_hex(s)
    }
}

impl Serialize for Digest {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Digest {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Self::from_hex(&String::deserialize(deserializer)?).map_err(serde::de::Error::custom)
    }
}

// ---- scalar layers --------------------------------------------------------

pub fn sbox_full(state: &PoseidonState) -> PoseidonState {
    state.map(field::pow7)
}

pub fn add_round_constants(state: &PoseidonState, block: &[Goldilocks; WIDTH]) -> PoseidonState {
    std::array::from_fn(|i| field::add(state[i], block[i]))
}

/// `state x M` as three 4x12 products over groups of output columns.
pub fn mds(state: &PoseidonState, m: &MdsMatrix) -> PoseidonState {
    let mut out = [Goldilocks::ZERO; WIDTH];
    for (k, chunk) in out.chunks_exact_mut(4).enumerate() {
        let part = match m.columns_u8() {
            Some(cols) => mmult_4x12_8(state, &std::array::from_fn(|r| cols[4 * k + r])),
            None => mmult_4x12(state, &std::array::from_fn(|r| m.columns()[4 * k + r])),
        };
        chunk.copy_from_slice(&part);
    }
    out
}

/// Sparse partial-round layer.
pub fn mds_partial(state: &PoseidonState, block: &PartialRoundConstants) -> PoseidonState {
    let tmp = state
        .iter()
        .zip(&block.v0)
        .fold(Goldilocks::ZERO, |acc, (&s, &v)| field::add(acc, field::mul(s, v)));
    let s0 = state[0];
    let mut out: PoseidonState = std::array::from_fn(|i| field::add(state[i], field::mul(s0, block.v1[i])));
    out[0] = tmp;
    out
}

fn full_round(state: &PoseidonState, m: &MdsMatrix, c: &[Goldilocks; WIDTH]) -> PoseidonState {
    add_round_constants(&mds(&sbox_full(state), m), c)
}

pub fn permute(state: &PoseidonState, consts: &PoseidonConstants) -> PoseidonState {
    let rc = consts.round_constants();
    let m = consts.mds();
    let mut s = add_round_constants(state, &rc[0]);
    for c in &rc[1..=HALF_FULL_ROUNDS] {
        s = full_round(&s, m, c);
    }
    for block in consts.partial_rounds() {
        s[0] = field::pow7(s[0]);
        s = mds_partial(&s, block);
    }
    for c in &rc[HALF_FULL_ROUNDS + 1..] {
        s = full_round(&s, m, c);
    }
    s
}

fn digest_of(state: &PoseidonState) -> Digest {
    Digest([state[0], state[1], state[2], state[3]])
}

fn block_state(input: &[Goldilocks; RATE], capacity: &[Goldilocks; DIGEST_LEN]) -> PoseidonState {
    let mut s = [Goldilocks::ZERO; WIDTH];
    s[..RATE].copy_from_slice(input);
    s[RATE..].copy_from_slice(capacity);
    s
}

/// One permutation of `input || capacity`; the digest is the first four words.
pub fn hash_block(
    input: &[Goldilocks],
    capacity: &[Goldilocks; DIGEST_LEN],
    consts: &PoseidonConstants,
) -> Result<Digest, PoseidonError> {
    let input: &[Goldilocks; RATE] = input.try_into().map_err(|_| PoseidonError::BlockLength(input.len()))?;
    Ok(digest_of(&permute(&block_state(input, capacity), consts)))
}

/// Hash of two child digests with zero capacity.
pub fn hash_pair(left: &Digest, right: &Digest, consts: &PoseidonConstants) -> Digest {
    let mut s = [Goldilocks::ZERO; WIDTH];
    s[..4].copy_from_slice(&left.0);
    s[4..8].copy_from_slice(&right.0);
    digest_of(&permute(&s, consts))
}

/// Sponge over any number of elements: zero-pad to a multiple of 8 (empty
/// input is one zero block), absorb chunk by chunk, carrying the last four
/// words of each output into the next capacity.
pub fn linear_hash(input: &[Goldilocks], consts: &PoseidonConstants) -> Digest {
    let mut capacity = [Goldilocks::ZERO; DIGEST_LEN];
    let mut digest = Digest::default();
    let blocks = input.len().div_ceil(RATE).max(1);
    for b in 0..blocks {
        let mut chunk = [Goldilocks::ZERO; RATE];
        let start = (b * RATE).min(input.len());
        let end = ((b + 1) * RATE).min(input.len());
        chunk[..end - start].copy_from_slice(&input[start..end]);
        let out = permute(&block_state(&chunk, &capacity), consts);
        capacity.copy_from_slice(&out[RATE..]);
        digest = digest_of(&out);
    }
    digest
}

// ---- backends -------------------------------------------------------------

/// Execution path for batched permutations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Backend {
    Scalar,
    Lanes(LaneWidth),
    /// Lane engine that also tallies abstract instructions.
    Counting(LaneWidth),
}

impl Backend {
    pub const ALL_EXECUTING: [Backend; 4] = [
        Backend::Scalar,
        Backend::Lanes(LaneWidth::W2),
        Backend::Lanes(LaneWidth::W4),
        Backend::Lanes(LaneWidth::W8),
    ];

    pub fn lane_width(self) -> Option<LaneWidth> {
        match self {
            Backend::Scalar => None,
            Backend::Lanes(w) | Backend::Counting(w) => Some(w),
        }
    }

    pub fn permuter(self, consts: &PoseidonConstants) -> Box<dyn Permuter + '_> {
        self.permuter_with_mode(consts, MulMode::Direct)
    }

    pub fn permuter_with_mode(self, consts: &PoseidonConstants, mode: MulMode) -> Box<dyn Permuter + '_> {
        use lanes::LanePermuter;
        match self {
            Backend::Scalar => Box::new(ScalarPermuter::new(consts)),
            Backend::Lanes(LaneWidth::W2) => Box::new(LanePermuter::<2, ()>::new(consts, (), mode)),
            Backend::Lanes(LaneWidth::W4) => Box::new(LanePermuter::<4, ()>::new(consts, (), mode)),
            Backend::Lanes(LaneWidth::W8) => Box::new(LanePermuter::<8, ()>::new(consts, (), mode)),
            Backend::Counting(LaneWidth::W2) => {
                Box::new(LanePermuter::<2, _>::new(consts, OpCounters::default(), mode))
            }
            Backend::Counting(LaneWidth::W4) => {
                Box::new(LanePermuter::<4, _>::new(consts, OpCounters::default(), mode))
            }
            Backend::Counting(LaneWidth::W8) => {
                Box::new(LanePermuter::<8, _>::new(consts, OpCounters::default(), mode))
            }
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::Scalar => f.write_str("scalar"),
            Backend::Lanes(w) => write!(f, "w{w}"),
            Backend::Counting(w) => write!(f, "counting-w{w}"),
        }
    }
}

impl FromStr for Backend {
    type Err = PoseidonError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        let width = |w: &str| {
            w.parse::<LaneWidth>()
                .map_err(|_| PoseidonError::UnknownBackend(s.to_string()))
        };
        if lower == "scalar" {
            Ok(Backend::Scalar)
        } else if let Some(w) = lower.strip_prefix("counting-w") {
            Ok(Backend::Counting(width(w)?))
        } else if let Some(w) = lower.strip_prefix('w') {
            Ok(Backend::Lanes(width(w)?))
        } else {
            Err(PoseidonError::UnknownBackend(s.to_string()))
        }
    }
}

impl Serialize for Backend {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Backend {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// Batched permutation engine. Instances are per thread.
pub trait Permuter: Send {
    /// States processed together by one pass (2 for eight-lane registers).
    fn batch(&self) -> usize;

    fn permute_many(&mut self, states: &mut [PoseidonState]);

    /// Instruction totals so far, for counting engines.
    fn counters(&self) -> Option<OpCounters> {
        None
    }

    fn permute(&mut self, state: &PoseidonState) -> PoseidonState {
        let mut one = [*state];
        self.permute_many(&mut one);
        one[0]
    }

    /// Leaf hashes: `hash_block(leaf, 0)` for every leaf.
    fn hash_leaves(&mut self, leaves: &[[Goldilocks; RATE]], out: &mut [Digest]) {
        hash_batched(self, leaves.len(), out, |i| {
            block_state(&leaves[i], &[Goldilocks::ZERO; DIGEST_LEN])
        });
    }

    /// `out[i] = hash_pair(children[2i], children[2i + 1])`.
    fn hash_pairs(&mut self, children: &[Digest], out: &mut [Digest]) {
        assert_eq!(children.len(), 2 * out.len());
        hash_batched(self, out.len(), out, |i| {
            let mut s = [Goldilocks::ZERO; WIDTH];
            s[..4].copy_from_slice(&children[2 * i].0);
            s[4..8].copy_from_slice(&children[2 * i + 1].0);
            s
        });
    }
}

fn hash_batched<P: Permuter + ?Sized>(
    permuter: &mut P,
    n: usize,
    out: &mut [Digest],
    state_of: impl Fn(usize) -> PoseidonState,
) {
    const CHUNK: usize = 64;
    let mut buf = [[Goldilocks::ZERO; WIDTH]; CHUNK];
    let mut start = 0;
    while start < n {
        let len = CHUNK.min(n - start);
        for (j, s) in buf[..len].iter_mut().enumerate() {
            *s = state_of(start + j);
        }
        permuter.permute_many(&mut buf[..len]);
        for (j, s) in buf[..len].iter().enumerate() {
            out[start + j] = digest_of(s);
        }
        start += len;
    }
}

/// The scalar reference path behind the [`Permuter`] interface.
pub struct ScalarPermuter<'a> {
    consts: &'a PoseidonConstants,
}

impl<'a> ScalarPermuter<'a> {
    pub fn new(consts: &'a PoseidonConstants) -> Self {
        Self { consts }
    }
}

impl Permuter for ScalarPermuter<'_> {
    fn batch(&self) -> usize {
        1
    }

    fn permute_many(&mut self, states: &mut [PoseidonState]) {
        for s in states {
            *s = permute(s, self.consts);
        }
    }
}
