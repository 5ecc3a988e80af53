//! Binary Merkle trees over Poseidon digests.
//!
//! Leaves are 8 field elements and hash with zero capacity; an internal
//! node is `hash_block(left || right, 0)`. Nodes are stored level by level
//! starting at the leaves, so a tree with `n` leaves holds `2n - 1`
//! digests and the root is the last one.
//!
//! Building is level-synchronous: each level is split into contiguous
//! chunks, one per worker thread, and the next level starts only after all
//! chunks of the current one are done. Every worker owns its own
//! [`Permuter`], so counting backends report the sum over workers.

use std::num::NonZeroUsize;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::Goldilocks;
use crate::poseidon::{self, Backend, Digest, Permuter, PoseidonConstants, RATE};
use crate::vecbackend::{MulMode, OpCounters};

/// Largest supported tree: 2^24 leaves is about 1 GiB of digests.
pub const MAX_LOG2_LEAVES: u32 = 24;

pub type Leaf = [Goldilocks; RATE];

#[derive(Debug, Error)]
pub enum MerkleError {
    #[error("leaf count {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("leaf data must be a whole number of {RATE}-element leaves, got {0} elements")]
    LeafShape(usize),
    #[error("leaf word {index} = {value} is not a canonical field element")]
    NonCanonicalLeaf { index: usize, value: u64 },
    #[error("tree of 2^{0} leaves exceeds the 2^{MAX_LOG2_LEAVES} limit")]
    TooLarge(u32),
    #[error("thread count must be positive")]
    ZeroThreads,
    #[error("leaf index {index} out of range for {leaf_count} leaves")]
    IndexOutOfRange { index: usize, leaf_count: usize },
    #[error("invalid proof: {0}")]
    InvalidProof(String),
}

/// Which side of the path node the sibling sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofStep {
    pub sibling: Digest,
    pub side: Side,
}

/// Authentication path from one leaf to the root, leaf level first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MerkleProof {
    pub leaf_index: usize,
    pub leaf_count: usize,
    pub path: Vec<ProofStep>,
}

impl MerkleProof {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("proof serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, MerkleError> {
        let proof: Self = serde_json::from_str(text).map_err(|e| MerkleError::InvalidProof(e.to_string()))?;
        if !proof.leaf_count.is_power_of_two() {
            return Err(MerkleError::InvalidProof(format!(
                "leaf_count {} is not a power of two",
                proof.leaf_count
            )));
        }
        if proof.leaf_index >= proof.leaf_count {
            return Err(MerkleError::InvalidProof(format!(
                "leaf_index {} out of range for {} leaves",
                proof.leaf_index, proof.leaf_count
            )));
        }
        if proof.path.len() != proof.leaf_count.trailing_zeros() as usize {
            return Err(MerkleError::InvalidProof(format!(
                "path has {} steps, tree depth is {}",
                proof.path.len(),
                proof.leaf_count.trailing_zeros()
            )));
        }
        Ok(proof)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MerkleTree {
    leaf_count: usize,
    nodes: Vec<Digest>,
    constants_id: String,
}

impl MerkleTree {
    /// Single-threaded scalar build.
    pub fn build(leaves: &[Leaf], consts: &PoseidonConstants) -> Result<Self, MerkleError> {
        MerkleBuilder::new().build(leaves, consts)
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_count
    }

    pub fn depth(&self) -> usize {
        self.leaf_count.trailing_zeros() as usize
    }

    pub fn nodes(&self) -> &[Digest] {
        &self.nodes
    }

    pub fn constants_id(&self) -> &str {
        &self.constants_id
    }

    pub fn root(&self) -> Digest {
        *self.nodes.last().expect("a tree has at least one node")
    }

    /// Digests of one level, 0 being the leaf hashes.
    pub fn level(&self, level: usize) -> &[Digest] {
        let mut start = 0;
        let mut len = self.leaf_count;
        for _ in 0..level {
            start += len;
            len /= 2;
        }
        &self.nodes[start..start + len]
    }

    pub fn prove(&self, index: usize) -> Result<MerkleProof, MerkleError> {
        if index >= self.leaf_count {
            return Err(MerkleError::IndexOutOfRange {
                index,
                leaf_count: self.leaf_count,
            });
        }
        let mut path = Vec::with_capacity(self.depth());
        let mut start = 0;
        let mut len = self.leaf_count;
        let mut i = index;
        while len > 1 {
            let (sibling, side) = if i % 2 == 0 {
                (i + 1, Side::Right)
            } else {
                (i - 1, Side::Left)
            };
            path.push(ProofStep {
                sibling: self.nodes[start + sibling],
                side,
            });
            start += len;
            len /= 2;
            i /= 2;
        }
        Ok(MerkleProof {
            leaf_index: index,
            leaf_count: self.leaf_count,
            path,
        })
    }
}

/// Recomputes the root from `leaf` along `proof`.
pub fn verify(root: &Digest, leaf: &Leaf, proof: &MerkleProof, consts: &PoseidonConstants) -> bool {
    if proof.leaf_index >= proof.leaf_count || proof.path.len() != proof.leaf_count.trailing_zeros() as usize {
        return false;
    }
    let mut acc = poseidon::hash_block(leaf, &[Goldilocks::ZERO; 4], consts).expect("leaf has 8 elements");
    let mut i = proof.leaf_index;
    for step in &proof.path {
        let expected_side = if i % 2 == 0 { Side::Right } else { Side::Left };
        if step.side != expected_side {
            return false;
        }
        acc = match step.side {
            Side::Right => poseidon::hash_pair(&acc, &step.sibling, consts),
            Side::Left => poseidon::hash_pair(&step.sibling, &acc, consts),
        };
        i /= 2;
    }
    acc == *root
}

/// Groups little-endian words into leaves, checking canonicity.
pub fn leaves_from_words(words: &[u64]) -> Result<Vec<Leaf>, MerkleError> {
    if words.len() % RATE != 0 {
        return Err(MerkleError::LeafShape(words.len()));
    }
    words
        .chunks_exact(RATE)
        .enumerate()
        .map(|(l, chunk)| {
            let mut leaf = [Goldilocks::ZERO; RATE];
            for (j, (slot, &w)) in leaf.iter_mut().zip(chunk).enumerate() {
                *slot = Goldilocks::new(w).map_err(|_| MerkleError::NonCanonicalLeaf {
                    index: l * RATE + j,
                    value: w,
                })?;
            }
            Ok(leaf)
        })
        .collect()
}

/// Parses a raw leaf file: little-endian `u64` words, 8 per leaf.
pub fn leaves_from_bytes(bytes: &[u8]) -> Result<Vec<Leaf>, MerkleError> {
    if bytes.len() % 8 != 0 {
        return Err(MerkleError::LeafShape(bytes.len() / 8));
    }
    let words: Vec<u64> = bytes
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    leaves_from_words(&words)
}

pub fn leaves_to_bytes(leaves: &[Leaf]) -> Vec<u8> {
    leaves.iter().flatten().flat_map(|e| e.to_le_bytes()).collect()
}

pub fn available_threads() -> usize {
    std::thread::available_parallelism().map(NonZeroUsize::get).unwrap_or(1)
}

/// Build settings: worker count, hashing backend and multiply mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MerkleBuilder {
    pub threads: usize,
    pub backend: Backend,
    pub mul_mode: MulMode,
}

impl Default for MerkleBuilder {
    fn default() -> Self {
        Self {
            threads: 1,
            backend: Backend::Scalar,
            mul_mode: MulMode::Direct,
        }
    }
}

impl MerkleBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn threads(mut self, threads: usize) -> Self {
        self.threads = threads;
        self
    }

    pub fn backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn mul_mode(mut self, mode: MulMode) -> Self {
        self.mul_mode = mode;
        self
    }

    pub fn build(&self, leaves: &[Leaf], consts: &PoseidonConstants) -> Result<MerkleTree, MerkleError> {
        self.build_counted(leaves, consts).map(|(tree, _)| tree)
    }

    /// Builds the tree and returns the summed instruction counters of all
    /// workers when the backend counts.
    pub fn build_counted(
        &self,
        leaves: &[Leaf],
        consts: &PoseidonConstants,
    ) -> Result<(MerkleTree, Option<OpCounters>), MerkleError> {
        let n = leaves.len();
        if !n.is_power_of_two() {
            return Err(MerkleError::NotPowerOfTwo(n));
        }
        let log2 = n.trailing_zeros();
        if log2 > MAX_LOG2_LEAVES {
            return Err(MerkleError::TooLarge(log2));
        }
        if self.threads == 0 {
            return Err(MerkleError::ZeroThreads);
        }
        let threads = self.threads.min(n);
        let mut permuters: Vec<Box<dyn Permuter + '_>> = (0..threads)
            .map(|_| self.backend.permuter_with_mode(consts, self.mul_mode))
            .collect();

        let mut nodes = vec![Digest::default(); 2 * n - 1];
        run_level(&mut permuters, n, &mut nodes[..n], |p, range, out| {
            p.hash_leaves(&leaves[range], out)
        });

        let mut child_start = 0;
        let mut len = n;
        while len > 1 {
            let (done, rest) = nodes.split_at_mut(child_start + len);
            let children = &done[child_start..];
            let out = &mut rest[..len / 2];
            run_level(&mut permuters, len / 2, out, |p, range, out| {
                p.hash_pairs(&children[2 * range.start..2 * range.end], out)
            });
            child_start += len;
            len /= 2;
        }

        let counters = permuters
            .iter()
            .map(|p| p.counters())
            .try_fold(OpCounters::default(), |mut acc, c| {
                acc += c?;
                Some(acc)
            });
        Ok((
            MerkleTree {
                leaf_count: n,
                nodes,
                constants_id: consts.id().to_string(),
            },
            counters,
        ))
    }
}

/// Splits `len` outputs into contiguous chunks, one per worker, and runs
/// them to completion. Levels narrower than the worker count use fewer
/// workers; a single active worker runs on the calling thread.
fn run_level<'c, F>(permuters: &mut [Box<dyn Permuter + 'c>], len: usize, out: &mut [Digest], work: F)
where
    F: Fn(&mut dyn Permuter, std::ops::Range<usize>, &mut [Digest]) + Sync,
{
    let active = permuters.len().min(len).max(1);
    let per = len.div_ceil(active);
    if active == 1 {
        work(permuters[0].as_mut(), 0..len, out);
        return;
    }
    std::thread::scope(|scope| {
        for (i, (chunk, p)) in out.chunks_mut(per).zip(permuters.iter_mut()).enumerate() {
            let work = &work;
            let start = i * per;
            scope.spawn(move || work(p.as_mut(), start..start + chunk.len(), chunk));
        }
    });
}
