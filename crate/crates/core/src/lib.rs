//! Goldilocks field arithmetic, the Poseidon permutation and parallel Merkle
//! trees, all runnable on a scalar path or on a lane-width-generic vector
//! layer (2, 4 or 8 lanes of 64 bits), plus a benchmark harness and an
//! analytical model for frequency, register-width, power and cost scaling.

pub mod bench;
pub mod field;
pub mod merkle;
pub mod poseidon;
pub mod rng;
pub mod vecbackend;
pub mod whatif;

pub use field::{Goldilocks, WideProduct, P};
