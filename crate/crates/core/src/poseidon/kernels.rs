//! 4x12 matrix-vector kernels. The MDS layer is three dense calls, one per
//! group of four output columns; the `_8` variants take byte-sized matrix
//! entries and multiply through [`field::mult_72`].

use crate::field::{self, Goldilocks};

use super::{PoseidonState, WIDTH};

/// Four dot products, skipping zero matrix entries.
pub fn spmv_4x12(state: &PoseidonState, rows: &[[Goldilocks; WIDTH]; 4]) -> [Goldilocks; 4] {
    rows.map(|row| {
        row.iter()
            .zip(state)
            .filter(|(m, _)| **m != Goldilocks::ZERO)
            .fold(Goldilocks::ZERO, |acc, (&m, &s)| field::add(acc, field::mul(s, m)))
    })
}

/// Four dense dot products.
pub fn mmult_4x12(state: &PoseidonState, rows: &[[Goldilocks; WIDTH]; 4]) -> [Goldilocks; 4] {
    rows.map(|row| {
        row.iter()
            .zip(state)
            .fold(Goldilocks::ZERO, |acc, (&m, &s)| field::add(acc, field::mul(s, m)))
    })
}

/// [`spmv_4x12`] with byte entries.
pub fn spmv_4x12_8(state: &PoseidonState, rows: &[[u8; WIDTH]; 4]) -> [Goldilocks; 4] {
    rows.map(|row| {
        row.iter()
            .zip(state)
            .filter(|(m, _)| **m != 0)
            .fold(Goldilocks::ZERO, |acc, (&m, &s)| field::add(acc, field::mult_72(s, m)))
    })
}

/// [`mmult_4x12`] with byte entries.
pub fn mmult_4x12_8(state: &PoseidonState, rows: &[[u8; WIDTH]; 4]) -> [Goldilocks; 4] {
    rows.map(|row| {
        row.iter()
            .zip(state)
            .fold(Goldilocks::ZERO, |acc, (&m, &s)| field::add(acc, field::mult_72(s, m)))
    })
}
