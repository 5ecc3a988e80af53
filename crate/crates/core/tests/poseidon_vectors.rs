//! Frozen outputs of the independent big-integer model (tools/poseidon_oracle.py)
//! over the bundled constants, checked on every backend.

use lanehash::merkle::{MerkleBuilder, MerkleTree};
use lanehash::poseidon::{self, Backend, Digest, PoseidonConstants, PoseidonState};
use lanehash::vecbackend::LaneWidth;
use lanehash::Goldilocks;
use serde::Deserialize;

#[derive(Deserialize)]
struct PermuteCase {
    input: Vec<Goldilocks>,
    output: Vec<Goldilocks>,
}

#[derive(Deserialize)]
struct BlockCase {
    input: Vec<Goldilocks>,
    capacity: Vec<Goldilocks>,
    digest: Vec<Goldilocks>,
}

#[derive(Deserialize)]
struct LinearCase {
    input: Vec<Goldilocks>,
    digest: Vec<Goldilocks>,
}

#[derive(Deserialize)]
struct MerkleCase {
    leaves: Vec<Vec<Goldilocks>>,
    root: Vec<Goldilocks>,
}

#[derive(Deserialize)]
struct Vectors {
    permute: Vec<PermuteCase>,
    hash_block: Vec<BlockCase>,
    linear_hash: Vec<LinearCase>,
    merkle: Vec<MerkleCase>,
}

fn vectors() -> Vectors {
    serde_json::from_str(include_str!("data/poseidon_vectors.json")).unwrap()
}

fn digest(v: &[Goldilocks]) -> Digest {
    Digest(v.try_into().unwrap())
}

const BACKENDS: [Backend; 5] = [
    Backend::Scalar,
    Backend::Lanes(LaneWidth::W2),
    Backend::Lanes(LaneWidth::W4),
    Backend::Lanes(LaneWidth::W8),
    Backend::Counting(LaneWidth::W8),
];

#[test]
fn permutation_vectors_on_every_backend() {
    let consts = PoseidonConstants::reference();
    let v = vectors();
    assert_eq!(v.permute.len(), 101);
    assert!(v.permute[0].input.iter().all(|x| *x == Goldilocks::ZERO));
    let inputs: Vec<PoseidonState> = v.permute.iter().map(|c| c.input.clone().try_into().unwrap()).collect();
    let expected: Vec<PoseidonState> = v.permute.iter().map(|c| c.output.clone().try_into().unwrap()).collect();

    for (i, e) in inputs.iter().zip(&expected) {
        assert_eq!(poseidon::permute(i, &consts), *e);
    }
    for backend in BACKENDS {
        let mut states = inputs.clone();
        backend.permuter(&consts).permute_many(&mut states);
        assert_eq!(states, expected, "{backend}");
    }
}

#[test]
fn hash_block_vectors() {
    let consts = PoseidonConstants::reference();
    for case in vectors().hash_block {
        let cap: [Goldilocks; 4] = case.capacity.clone().try_into().unwrap();
        assert_eq!(
            poseidon::hash_block(&case.input, &cap, &consts).unwrap(),
            digest(&case.digest)
        );
    }
}

#[test]
fn linear_hash_vectors() {
    let consts = PoseidonConstants::reference();
    let cases = vectors().linear_hash;
    assert!(cases.iter().any(|c| c.input.is_empty()));
    assert!(cases.iter().any(|c| c.input.len() == 16));
    for case in cases {
        assert_eq!(
            poseidon::linear_hash(&case.input, &consts),
            digest(&case.digest),
            "n = {}",
            case.input.len()
        );
    }
}

#[test]
fn merkle_root_vectors() {
    let consts = PoseidonConstants::reference();
    for case in vectors().merkle {
        let leaves: Vec<[Goldilocks; 8]> = case.leaves.iter().map(|l| l.clone().try_into().unwrap()).collect();
        let root = digest(&case.root);
        assert_eq!(MerkleTree::build(&leaves, &consts).unwrap().root(), root);
        for backend in BACKENDS {
            let tree = MerkleBuilder::new()
                .backend(backend)
                .threads(2)
                .build(&leaves, &consts)
                .unwrap();
            assert_eq!(tree.root(), root, "{backend}, n = {}", leaves.len());
        }
    }
}
