//! Poseidon on the lane engine.
//!
//! A state is split into `R = 12 / c` registers of `c = min(W, 4)` words;
//! register `k`, lane `b*c + j` holds word `k*c + j` of state `b`. Two-
//! and four-lane registers carry one state, eight-lane registers carry two
//! side by side.
//!
//! The dense layer follows the column-group scheme: for each output column
//! the registers are multiplied by the matching column chunk and summed, so
//! each lane group holds `c` partial sums of that output. A `c x c` block
//! transpose over the `c` columns of one output chunk then lines the
//! partial sums up so that adding the transposed rows yields the finished
//! output register.

use crate::field::Goldilocks;
use crate::vecbackend::{LaneOps, Lanes, Mask, MulMode, OpCounters, OpSink};

use super::{Permuter, PoseidonConstants, PoseidonState, HALF_FULL_ROUNDS, WIDTH};

/// Words of one state per register.
pub const fn chunk(w: usize) -> usize {
    if w < 4 {
        w
    } else {
        4
    }
}

/// Constants pre-packed into register images for a fixed lane count.
#[derive(Debug, Clone)]
pub struct PackedConstants<const W: usize> {
    /// `[round][k]`
    round: Vec<Vec<Lanes<W>>>,
    /// `[col][k]`: chunk `k` of column `col`, repeated per state.
    mds_cols: Vec<Vec<Lanes<W>>>,
    mds_small: bool,
    /// `[round][k]`
    v0: Vec<Vec<Lanes<W>>>,
    v1: Vec<Vec<Lanes<W>>>,
}

fn pack<const W: usize>(words: &[Goldilocks; WIDTH]) -> Vec<Lanes<W>> {
    let c = chunk(W);
    (0..WIDTH / c)
        .map(|k| Lanes(std::array::from_fn(|lane| words[k * c + lane % c].value())))
        .collect()
}

impl<const W: usize> PackedConstants<W> {
    pub fn new(consts: &PoseidonConstants) -> Self {
        let m = consts.mds();
        Self {
            round: consts.round_constants().iter().map(pack).collect(),
            mds_cols: m.columns().iter().map(pack).collect(),
            mds_small: m.columns_u8().is_some(),
            v0: consts.partial_rounds().iter().map(|p| pack(&p.v0)).collect(),
            v1: consts.partial_rounds().iter().map(|p| pack(&p.v1)).collect(),
        }
    }
}

/// `out` chunk `k` of `regs x M` for the columns `k*c .. k*c + c`.
fn dense_chunk<const W: usize, S: OpSink>(
    ops: &mut LaneOps<W, S>,
    regs: &[Lanes<W>],
    cols: &[Vec<Lanes<W>>],
    small: bool,
    skip_zero: bool,
) -> Lanes<W> {
    let c = chunk(W);
    let mut partial = [Lanes::<W>::default(); 4];
    for (col, acc) in cols.iter().zip(partial.iter_mut()) {
        let mut sum: Option<Lanes<W>> = None;
        for (r, packed) in regs.iter().zip(col) {
            if skip_zero && packed.is_zero() {
                continue;
            }
            let m = ops.load_reg(packed);
            let p = if small { ops.mul_u8(*r, m) } else { ops.mul(*r, m) };
            sum = Some(match sum {
                Some(s) => ops.add(s, p),
                None => p,
            });
        }
        *acc = sum.unwrap_or_default();
    }
    let rows = &mut partial[..c];
    ops.transpose(rows, c);
    let mut out = rows[0];
    for row in &rows[1..] {
        out = ops.add(out, *row);
    }
    out
}

fn dense<const W: usize, S: OpSink>(
    ops: &mut LaneOps<W, S>,
    regs: &[Lanes<W>],
    cols: &[Vec<Lanes<W>>],
    small: bool,
    out: &mut [Lanes<W>],
) {
    let c = chunk(W);
    for (k, o) in out.iter_mut().enumerate() {
        *o = dense_chunk(ops, regs, &cols[k * c..(k + 1) * c], small, false);
    }
}

/// Batched permutation on `W`-lane registers. `S` is `()` for plain
/// execution or [`OpCounters`] to tally instructions.
pub struct LanePermuter<const W: usize, S: OpSink = ()> {
    ops: LaneOps<W, S>,
    packed: PackedConstants<W>,
}

impl<const W: usize, S: OpSink> LanePermuter<W, S> {
    const C: usize = chunk(W);
    const R: usize = WIDTH / Self::C;
    const B: usize = W / Self::C;
    /// States held side by side in one register set.
    pub const BATCH: usize = Self::B;

    pub fn new(consts: &PoseidonConstants, sink: S, mode: MulMode) -> Self {
        Self {
            ops: LaneOps::new(sink, mode),
            packed: PackedConstants::new(consts),
        }
    }

    pub fn ops(&self) -> &LaneOps<W, S> {
        &self.ops
    }

    pub fn into_sink(self) -> S {
        self.ops.into_sink()
    }

    fn load(&mut self, states: &[PoseidonState], regs: &mut [Lanes<W>]) {
        let c = Self::C;
        for (k, reg) in regs.iter_mut().enumerate() {
            let mut buf = [0u64; W];
            for (b, s) in states.iter().enumerate() {
                for j in 0..c {
                    buf[b * c + j] = s[k * c + j].value();
                }
            }
            *reg = self.ops.load(&buf);
        }
    }

    fn store(&mut self, regs: &[Lanes<W>], states: &mut [PoseidonState]) {
        let c = Self::C;
        for (k, reg) in regs.iter().enumerate() {
            let mut buf = [0u64; W];
            self.ops.store(*reg, &mut buf);
            for (b, s) in states.iter_mut().enumerate() {
                for j in 0..c {
                    s[k * c + j] = Goldilocks::from_canonical(buf[b * c + j]);
                }
            }
        }
    }

    fn add_constants(&mut self, regs: &mut [Lanes<W>], round: usize) {
        for (r, packed) in regs.iter_mut().zip(&self.packed.round[round]) {
            let c = self.ops.load_reg(packed);
            *r = self.ops.add(*r, c);
        }
    }

    fn full_round(&mut self, regs: &mut [Lanes<W>], round: usize) {
        let mut sboxed = [Lanes::<W>::default(); 6];
        let sboxed = &mut sboxed[..Self::R];
        for (s, r) in sboxed.iter_mut().zip(regs.iter()) {
            *s = self.ops.pow7(*r);
        }
        dense(
            &mut self.ops,
            sboxed,
            &self.packed.mds_cols,
            self.packed.mds_small,
            regs,
        );
        self.add_constants(regs, round);
    }

    fn partial_round(&mut self, regs: &mut [Lanes<W>], round: usize) {
        let c = Self::C;
        let first = Mask::block_lane(c, 0);
        let p = self.ops.pow7(regs[0]);
        regs[0] = self.ops.select(first, p, regs[0]);

        let mut dot: Option<Lanes<W>> = None;
        for (r, packed) in regs.iter().zip(&self.packed.v0[round]) {
            let v = self.ops.load_reg(packed);
            let t = self.ops.mul(*r, v);
            dot = Some(match dot {
                Some(d) => self.ops.add(d, t),
                None => t,
            });
        }
        let dot = self.ops.block_sum(dot.expect("at least one register"), c);

        let s0 = self.ops.block_broadcast(regs[0], c, 0);
        for (r, packed) in regs.iter_mut().zip(&self.packed.v1[round]) {
            let v = self.ops.load_reg(packed);
            let w = self.ops.mul(s0, v);
            *r = self.ops.add(*r, w);
        }
        regs[0] = self.ops.select(first, dot, regs[0]);
    }

    /// Permutes up to `B` states held in one register set.
    fn permute_group(&mut self, states: &mut [PoseidonState]) {
        debug_assert!(!states.is_empty() && states.len() <= Self::B);
        let mut regs_buf = [Lanes::<W>::default(); 6];
        let regs = &mut regs_buf[..Self::R];
        self.load(states, regs);
        self.add_constants(regs, 0);
        for round in 1..=HALF_FULL_ROUNDS {
            self.full_round(regs, round);
        }
        for round in 0..self.packed.v0.len() {
            self.partial_round(regs, round);
        }
        for round in HALF_FULL_ROUNDS + 1..self.packed.round.len() {
            self.full_round(regs, round);
        }
        self.store(regs, states);
    }

    /// One 4x12 matrix kernel: `out[b][i] = rows[i] . states[b]` for up to
    /// [`Self::BATCH`] states. Rows play the role of dense-layer columns, so
    /// this is one MDS output chunk per `c` rows. With `sparse`, register
    /// products against all-zero row chunks are skipped.
    pub fn matrix_4x12_into(
        &mut self,
        states: &[PoseidonState],
        rows: &PackedRows<W>,
        sparse: bool,
        out: &mut [[Goldilocks; 4]],
    ) {
        debug_assert!(states.len() <= Self::B && out.len() == states.len());
        let c = Self::C;
        let mut regs_buf = [Lanes::<W>::default(); 6];
        let regs = &mut regs_buf[..Self::R];
        self.load(states, regs);
        for k in 0..4 / c {
            let v = dense_chunk(&mut self.ops, regs, &rows.cols[k * c..(k + 1) * c], rows.small, sparse);
            let mut buf = [0u64; W];
            self.ops.store(v, &mut buf);
            for (b, o) in out.iter_mut().enumerate() {
                for j in 0..c {
                    o[k * c + j] = Goldilocks::from_canonical(buf[b * c + j]);
                }
            }
        }
    }

    pub fn matrix_4x12(
        &mut self,
        states: &[PoseidonState],
        rows: &PackedRows<W>,
        sparse: bool,
    ) -> Vec<[Goldilocks; 4]> {
        let mut out = vec![[Goldilocks::ZERO; 4]; states.len()];
        for (s, o) in states.chunks(Self::B).zip(out.chunks_mut(Self::B)) {
            self.matrix_4x12_into(s, rows, sparse, o);
        }
        out
    }
}

/// Four matrix rows packed for [`LanePermuter::matrix_4x12`].
#[derive(Debug, Clone)]
pub struct PackedRows<const W: usize> {
    cols: Vec<Vec<Lanes<W>>>,
    small: bool,
}

impl<const W: usize> PackedRows<W> {
    pub fn new(rows: &[[Goldilocks; WIDTH]; 4]) -> Self {
        Self {
            cols: rows.iter().map(pack).collect(),
            small: false,
        }
    }

    pub fn new_u8(rows: &[[u8; WIDTH]; 4]) -> Self {
        let wide = rows.map(|r| r.map(|x| Goldilocks::from_canonical(x as u64)));
        Self {
            cols: wide.iter().map(pack).collect(),
            small: true,
        }
    }
}

impl<const W: usize, S: OpSink + Send> Permuter for LanePermuter<W, S> {
    fn batch(&self) -> usize {
        Self::B
    }

    fn permute_many(&mut self, states: &mut [PoseidonState]) {
        for group in states.chunks_mut(Self::B) {
            self.permute_group(group);
        }
    }

    fn counters(&self) -> Option<OpCounters> {
        self.ops.sink().counters()
    }
}
