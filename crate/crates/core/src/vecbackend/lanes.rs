//! Compile-time-width lane registers and the instruction set over them.
//!
//! [`LaneOps`] exposes two layers. The primitives (`iadd`, `cmp_ge`,
//! `pred_sub`, `mul_hi`, ...) each model one vector instruction and record one
//! event in the sink. The field operations are built only from those
//! primitives, in the same step order as the scalar algorithms in
//! [`crate::field`], so the instruction mix per field op is fixed:
//!
//! | op            | instructions                                                    |
//! |---------------|-----------------------------------------------------------------|
//! | `add`         | vsub (P - a), vadd, vcompare, vselect (predicated - P)          |
//! | `sub`         | vsub, vcompare, vselect (predicated + P)                        |
//! | `mul_wide`    | direct: vmul_lo, vmul_hi; split: 4 vmul_lo, 6 vshift, 3 vand, 4 vadd, vselect |
//! | `reduce_128`  | 2 vshift, vand, 2 vsub, vadd, 3 vcompare, 3 vselect (12 total)  |
//! | `mul_u8`      | vmul_lo, vmul_hi, vshift, vsub, vadd, 2 vcompare, 2 vselect     |
//!
//! Predicated (merging) arithmetic counts as `vselect`. Every stream is
//! data-oblivious: the counts depend only on which ops are called.

use crate::field::{EPSILON, P};

use super::counters::{OpClass, OpSink};
use super::MulMode;

const LOW32: u64 = 0xFFFF_FFFF;

/// One vector register of `W` 64-bit lanes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Lanes<const W: usize>(pub [u64; W]);

impl<const W: usize> Default for Lanes<W> {
    fn default() -> Self {
        Self([0; W])
    }
}

impl<const W: usize> Lanes<W> {
    #[inline(always)]
    pub const fn splat(x: u64) -> Self {
        Self([x; W])
    }

    #[inline(always)]
    fn map(self, f: impl Fn(u64) -> u64) -> Self {
        let mut out = self.0;
        for x in out.iter_mut() {
            *x = f(*x);
        }
        Self(out)
    }

    #[inline(always)]
    fn zip(self, other: Self, f: impl Fn(u64, u64) -> u64) -> Self {
        Self(std::array::from_fn(|i| f(self.0[i], other.0[i])))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }
}

/// Per-lane predicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mask<const W: usize>(pub [bool; W]);

impl<const W: usize> Mask<W> {
    /// Lanes whose index within each `block`-wide group equals `lane`.
    pub fn block_lane(block: usize, lane: usize) -> Self {
        let mut m = [false; W];
        for (i, slot) in m.iter_mut().enumerate() {
            *slot = i % block == lane;
        }
        Self(m)
    }
}

/// Instruction issue unit for `W`-lane registers, recording into `S`.
#[derive(Debug, Clone, Default)]
pub struct LaneOps<const W: usize, S: OpSink = ()> {
    sink: S,
    mul_mode: MulMode,
}

impl<const W: usize, S: OpSink> LaneOps<W, S> {
    pub fn new(sink: S, mul_mode: MulMode) -> Self {
        assert!(matches!(W, 2 | 4 | 8), "unsupported lane count {W}");
        Self { sink, mul_mode }
    }

    pub fn sink(&self) -> &S {
        &self.sink
    }

    pub fn sink_mut(&mut self) -> &mut S {
        &mut self.sink
    }

    pub fn into_sink(self) -> S {
        self.sink
    }

    pub fn mul_mode(&self) -> MulMode {
        self.mul_mode
    }

    #[inline(always)]
    fn tick(&mut self, class: OpClass) {
        self.sink.record(class, 1);
    }

    // ---- primitives -------------------------------------------------------

    #[inline(always)]
    pub fn load(&mut self, src: &[u64]) -> Lanes<W> {
        self.tick(OpClass::Vload);
        let mut out = [0u64; W];
        out.copy_from_slice(&src[..W]);
        Lanes(out)
    }

    /// Load of a register image already laid out in memory (packed constants).
    #[inline(always)]
    pub fn load_reg(&mut self, src: &Lanes<W>) -> Lanes<W> {
        self.tick(OpClass::Vload);
        *src
    }

    #[inline(always)]
    pub fn store(&mut self, v: Lanes<W>, dst: &mut [u64]) {
        self.tick(OpClass::Vstore);
        dst[..W].copy_from_slice(&v.0);
    }

    #[inline(always)]
    pub fn iadd(&mut self, a: Lanes<W>, b: Lanes<W>) -> Lanes<W> {
        self.tick(OpClass::Vadd);
        a.zip(b, u64::wrapping_add)
    }

    #[inline(always)]
    pub fn isub(&mut self, a: Lanes<W>, b: Lanes<W>) -> Lanes<W> {
        self.tick(OpClass::Vsub);
        a.zip(b, u64::wrapping_sub)
    }

    #[inline(always)]
    pub fn mul_lo(&mut self, a: Lanes<W>, b: Lanes<W>) -> Lanes<W> {
        self.tick(OpClass::VmulLo);
        a.zip(b, u64::wrapping_mul)
    }

    #[inline(always)]
    pub fn mul_hi(&mut self, a: Lanes<W>, b: Lanes<W>) -> Lanes<W> {
        self.tick(OpClass::VmulHi);
        a.zip(b, |x, y| ((x as u128 * y as u128) >> 64) as u64)
    }

    #[inline(always)]
    pub fn shr(&mut self, a: Lanes<W>, k: u32) -> Lanes<W> {
        self.tick(OpClass::Vshift);
        a.map(|x| x >> k)
    }

    #[inline(always)]
    pub fn shl(&mut self, a: Lanes<W>, k: u32) -> Lanes<W> {
        self.tick(OpClass::Vshift);
        a.map(|x| x << k)
    }

    #[inline(always)]
    pub fn and(&mut self, a: Lanes<W>, b: Lanes<W>) -> Lanes<W> {
        self.tick(OpClass::Vand);
        a.zip(b, |x, y| x & y)
    }

    #[inline(always)]
    fn compare(&mut self, a: Lanes<W>, b: Lanes<W>, f: impl Fn(u64, u64) -> bool) -> Mask<W> {
        self.tick(OpClass::Vcompare);
        Mask(std::array::from_fn(|i| f(a.0[i], b.0[i])))
    }

    /// Unsigned `a > b`.
    #[inline(always)]
    pub fn cmp_gt(&mut self, a: Lanes<W>, b: Lanes<W>) -> Mask<W> {
        self.compare(a, b, |x, y| x > y)
    }

    /// Unsigned `a >= b`.
    #[inline(always)]
    pub fn cmp_ge(&mut self, a: Lanes<W>, b: Lanes<W>) -> Mask<W> {
        self.compare(a, b, |x, y| x >= y)
    }

    /// `m ? a : b`.
    #[inline(always)]
    pub fn select(&mut self, m: Mask<W>, a: Lanes<W>, b: Lanes<W>) -> Lanes<W> {
        self.tick(OpClass::Vselect);
        Lanes(std::array::from_fn(|i| if m.0[i] { a.0[i] } else { b.0[i] }))
    }

    /// Merging predicated add: `m ? a + b : a`.
    #[inline(always)]
    pub fn pred_add(&mut self, m: Mask<W>, a: Lanes<W>, b: Lanes<W>) -> Lanes<W> {
        self.tick(OpClass::Vselect);
        Lanes(std::array::from_fn(|i| {
            if m.0[i] {
                a.0[i].wrapping_add(b.0[i])
            } else {
                a.0[i]
            }
        }))
    }

    /// Merging predicated subtract: `m ? a - b : a`.
    #[inline(always)]
    pub fn pred_sub(&mut self, m: Mask<W>, a: Lanes<W>, b: Lanes<W>) -> Lanes<W> {
        self.tick(OpClass::Vselect);
        Lanes(std::array::from_fn(|i| {
            if m.0[i] {
                a.0[i].wrapping_sub(b.0[i])
            } else {
                a.0[i]
            }
        }))
    }

    /// Lane gather: `out[i] = a[idx[i]]`.
    #[inline(always)]
    pub fn permute(&mut self, a: Lanes<W>, idx: &[usize; W]) -> Lanes<W> {
        self.tick(OpClass::Vpermute);
        let mut out = [0u64; W];
        for i in 0..W {
            out[i] = a.0[idx[i]];
        }
        Lanes(out)
    }

    // ---- field operations -------------------------------------------------

    #[inline]
    pub fn add(&mut self, a: Lanes<W>, b: Lanes<W>) -> Lanes<W> {
        let d = self.isub(Lanes::splat(P), a);
        let c = self.iadd(a, b);
        let over = self.cmp_ge(b, d);
        self.pred_sub(over, c, Lanes::splat(P))
    }

    #[inline]
    pub fn sub(&mut self, a: Lanes<W>, b: Lanes<W>) -> Lanes<W> {
        let c = self.isub(a, b);
        let borrow = self.cmp_gt(b, a);
        self.pred_add(borrow, c, Lanes::splat(P))
    }

    /// 128-bit products as `(hi, lo)` using the configured multiply mode.
    #[inline]
    pub fn mul_wide(&mut self, a: Lanes<W>, b: Lanes<W>) -> (Lanes<W>, Lanes<W>) {
        match self.mul_mode {
            MulMode::Direct => self.mul_wide_direct(a, b),
            MulMode::Split32 => self.mul_wide_split(a, b),
        }
    }

    #[inline]
    pub fn mul_wide_direct(&mut self, a: Lanes<W>, b: Lanes<W>) -> (Lanes<W>, Lanes<W>) {
        let lo = self.mul_lo(a, b);
        let hi = self.mul_hi(a, b);
        (hi, lo)
    }

    pub fn mul_wide_split(&mut self, a: Lanes<W>, b: Lanes<W>) -> (Lanes<W>, Lanes<W>) {
        let mask = Lanes::splat(LOW32);
        let a_h = self.shr(a, 32);
        let b_h = self.shr(b, 32);
        let a_l = self.and(a, mask);
        let b_l = self.and(b, mask);
        let c_hh = self.mul_lo(a_h, b_h);
        let c_hl = self.mul_lo(a_h, b_l);
        let c_lh = self.mul_lo(a_l, b_h);
        let c_ll = self.mul_lo(a_l, b_l);
        let c_ll_h = self.shr(c_ll, 32);
        let r0 = self.iadd(c_hl, c_ll_h);
        let r0_l = self.and(r0, mask);
        let r1 = self.iadd(c_lh, r0_l);
        let r1_l = self.shl(r1, 32);
        // 32-bit interleave: odd halves from r1_l, even halves from c_ll
        self.tick(OpClass::Vselect);
        let lo = r1_l.zip(c_ll, |h, l| (h & !LOW32) | (l & LOW32));
        let r0_h = self.shr(r0, 32);
        let r2 = self.iadd(c_hh, r0_h);
        let r1_h = self.shr(r1, 32);
        let hi = self.iadd(r2, r1_h);
        (hi, lo)
    }

    #[inline]
    pub fn reduce_128(&mut self, hi: Lanes<W>, lo: Lanes<W>) -> Lanes<W> {
        let eps = Lanes::splat(EPSILON);
        let r_hh = self.shr(hi, 32);
        let r_hl = self.and(hi, eps);
        let tmp1 = self.isub(lo, r_hh);
        let borrow = self.cmp_gt(r_hh, lo);
        let tmp1 = self.pred_sub(borrow, tmp1, eps);
        // r_hl * (2^32 - 1) = (r_hl << 32) - r_hl
        let shifted = self.shl(r_hl, 32);
        let tmp2 = self.isub(shifted, r_hl);
        let res = self.iadd(tmp1, tmp2);
        let carry = self.cmp_gt(tmp1, res);
        let ge = self.cmp_ge(res, Lanes::splat(P));
        // carry implies res < P, so the two fix-ups never both fire
        let res = self.pred_add(carry, res, eps);
        self.pred_sub(ge, res, Lanes::splat(P))
    }

    #[inline]
    pub fn mul(&mut self, a: Lanes<W>, b: Lanes<W>) -> Lanes<W> {
        let (hi, lo) = self.mul_wide(a, b);
        self.reduce_128(hi, lo)
    }

    #[inline]
    pub fn square(&mut self, a: Lanes<W>) -> Lanes<W> {
        self.mul(a, a)
    }

    /// Product with factors below 256 in every lane of `b`.
    #[inline]
    pub fn mul_u8(&mut self, a: Lanes<W>, b: Lanes<W>) -> Lanes<W> {
        debug_assert!(b.0.iter().all(|&x| x < 256));
        let lo = self.mul_lo(a, b);
        let hi = self.mul_hi(a, b);
        let shifted = self.shl(hi, 32);
        let t = self.isub(shifted, hi);
        let s = self.iadd(lo, t);
        let carry = self.cmp_gt(lo, s);
        let ge = self.cmp_ge(s, Lanes::splat(P));
        let s = self.pred_add(carry, s, Lanes::splat(EPSILON));
        self.pred_sub(ge, s, Lanes::splat(P))
    }

    #[inline]
    pub fn pow7(&mut self, a: Lanes<W>) -> Lanes<W> {
        let x2 = self.square(a);
        let x3 = self.mul(x2, a);
        let x4 = self.square(x2);
        self.mul(x4, x3)
    }

    // ---- cross-lane -------------------------------------------------------

    /// Transposes `block x block` tiles held in `rows` (one tile per
    /// `block`-lane group). `block == W` is the plain square transpose.
    /// Counted as the `block * log2(block)` zip instructions it takes.
    pub fn transpose(&mut self, rows: &mut [Lanes<W>], block: usize) {
        assert!(block.is_power_of_two() && block >= 2 && W % block == 0);
        assert_eq!(rows.len(), block, "transpose needs exactly {block} rows");
        let stages = block.trailing_zeros() as u64;
        self.sink.record(OpClass::Vpermute, block as u64 * stages);
        for base in (0..W).step_by(block) {
            for i in 0..block {
                for j in (i + 1)..block {
                    let t = rows[i].0[base + j];
                    rows[i].0[base + j] = rows[j].0[base + i];
                    rows[j].0[base + i] = t;
                }
            }
        }
    }

    /// Field sum of each `block`-lane group, replicated to every lane of the group.
    pub fn block_sum(&mut self, mut a: Lanes<W>, block: usize) -> Lanes<W> {
        assert!(block.is_power_of_two() && W % block == 0);
        let mut dist = 1;
        while dist < block {
            let mut idx = [0usize; W];
            for (i, slot) in idx.iter_mut().enumerate() {
                *slot = i ^ dist;
            }
            let swapped = self.permute(a, &idx);
            a = self.add(a, swapped);
            dist <<= 1;
        }
        a
    }

    /// Copies lane `lane` of each `block`-lane group across the group.
    pub fn block_broadcast(&mut self, a: Lanes<W>, block: usize, lane: usize) -> Lanes<W> {
        let mut idx = [0usize; W];
        for (i, slot) in idx.iter_mut().enumerate() {
            *slot = (i / block) * block + lane;
        }
        self.permute(a, &idx)
    }
}
