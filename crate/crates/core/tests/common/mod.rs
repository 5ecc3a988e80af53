//! Independent oracles shared by the integration tests and the acceptance
//! harness. Nothing here calls into the crate's arithmetic: field values go
//! through arbitrary-precision integers and matrix products are written out
//! as plain sums over the full matrix.

#![allow(dead_code)]

use lanehash::poseidon::{MdsMatrix, PartialRoundConstants, PoseidonState, WIDTH};
use lanehash::{Goldilocks, P};
use num_bigint::BigUint;

/// Edge values every field check includes.
pub const BOUNDARY: [u64; 6] = [0, 1, (1 << 32) - 1, 1 << 32, 1 << 63, P - 1];

fn modulus() -> BigUint {
    BigUint::from(P)
}

fn narrow(x: BigUint) -> u64 {
    let digits = (x % modulus()).to_u64_digits();
    digits.first().copied().unwrap_or(0)
}

pub fn add(a: u64, b: u64) -> u64 {
    narrow(BigUint::from(a) + BigUint::from(b))
}

pub fn sub(a: u64, b: u64) -> u64 {
    narrow(BigUint::from(a) + modulus() - BigUint::from(b) % modulus())
}

pub fn mul(a: u64, b: u64) -> u64 {
    narrow(BigUint::from(a) * BigUint::from(b))
}

pub fn reduce(x: u128) -> u64 {
    narrow(BigUint::from(x))
}

pub fn pow(a: u64, e: u64) -> u64 {
    narrow(BigUint::from(a).modpow(&BigUint::from(e), &modulus()))
}

/// The full 128-bit product as `(hi, lo)`.
pub fn wide(a: u64, b: u64) -> (u64, u64) {
    let p = BigUint::from(a) * BigUint::from(b);
    let mask = BigUint::from(u64::MAX);
    let lo = (&p & &mask).to_u64_digits().first().copied().unwrap_or(0);
    let hi = (p >> 64u32).to_u64_digits().first().copied().unwrap_or(0);
    (hi, lo)
}

fn g(x: u64) -> Goldilocks {
    Goldilocks::new(x).expect("oracle output is canonical")
}

/// `state x M` summed over a full 12x12 matrix of words.
pub fn vec_mat(state: &PoseidonState, m: &[[u64; WIDTH]; WIDTH]) -> PoseidonState {
    std::array::from_fn(|col| {
        let sum = (0..WIDTH).fold(BigUint::from(0u8), |acc, i| {
            acc + BigUint::from(state[i].value()) * BigUint::from(m[i][col])
        });
        g(narrow(sum))
    })
}

pub fn dense(m: &MdsMatrix) -> [[u64; WIDTH]; WIDTH] {
    m.rows().map(|r| r.map(|e| e.value()))
}

/// The sparse matrix a partial-round block stands for: first column `v0`,
/// first row (past the corner) `v1`, identity elsewhere.
pub fn sparse(block: &PartialRoundConstants) -> [[u64; WIDTH]; WIDTH] {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| match (i, j) {
            (_, 0) => block.v0[i].value(),
            (0, _) => block.v1[j].value(),
            _ => u64::from(i == j),
        })
    })
}
