//! Seeded input generation.
//!
//! Streams come from xoshiro256** seeded through SplitMix64
//! (`Xoshiro256StarStar::seed_from_u64`), both publicly specified, so a
//! rerun in another language with the same seed sees the same inputs.
//! Field elements use rejection sampling: 64-bit draws at or above `P` are
//! discarded, which keeps the distribution uniform over `[0, P)`.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

use crate::field::{Goldilocks, P};
use crate::merkle::Leaf;
use crate::poseidon::{PoseidonState, WIDTH};

#[derive(Debug, Clone)]
pub struct ElementRng(Xoshiro256StarStar);

impl ElementRng {
    pub fn new(seed: u64) -> Self {
        Self(Xoshiro256StarStar::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    pub fn next_u8(&mut self) -> u8 {
        (self.0.next_u64() >> 56) as u8
    }

    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        let zone = u64::MAX - u64::MAX % bound;
        loop {
            let x = self.0.next_u64();
            if x < zone {
                return x % bound;
            }
        }
    }

    pub fn element(&mut self) -> Goldilocks {
        loop {
            let x = self.0.next_u64();
            if x < P {
                return Goldilocks::from_canonical(x);
            }
        }
    }

    pub fn elements(&mut self, n: usize) -> Vec<Goldilocks> {
        (0..n).map(|_| self.element()).collect()
    }

    pub fn state(&mut self) -> PoseidonState {
        std::array::from_fn(|_| self.element())
    }

    pub fn states(&mut self, n: usize) -> Vec<PoseidonState> {
        (0..n).map(|_| self.state()).collect()
    }

    pub fn row(&mut self) -> [Goldilocks; WIDTH] {
        self.state()
    }

    pub fn leaf(&mut self) -> Leaf {
        std::array::from_fn(|_| self.element())
    }

    pub fn leaves(&mut self, n: usize) -> Vec<Leaf> {
        (0..n).map(|_| self.leaf()).collect()
    }
}
