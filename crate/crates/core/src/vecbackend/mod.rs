//! Lane-abstract vector layer.
//!
//! A register holds `W` 64-bit lanes, `W` in {2, 4, 8} for 128-, 256- and
//! 512-bit vectors. [`lanes`] carries the compile-time-width implementation
//! used on hot paths. [`VectorBatch`] and [`VectorUnit`] wrap it with a
//! runtime width for callers that pick the width from configuration, and
//! reject mixed widths with [`LaneError`].
//!
//! Lane semantics are the scalar functions of [`crate::field`] applied lane
//! by lane; the per-instruction loop is normative.

mod counters;
pub mod lanes;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Goldilocks, P};

pub use counters::{OpClass, OpCounters, OpSink};
pub use lanes::{LaneOps, Lanes, Mask};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LaneError {
    #[error("lane width mismatch: expected {expected} lanes, got {found}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("unsupported lane count {0} (expected 2, 4 or 8)")]
    UnsupportedWidth(usize),
    #[error("lane {lane} holds non-canonical value {value}")]
    NotCanonical { lane: usize, value: u64 },
    #[error("transpose needs a square block: {rows} rows of {width} lanes")]
    NonSquare { rows: usize, width: usize },
    #[error("unknown multiply mode {0:?} (expected direct or split32)")]
    UnknownMulMode(String),
}

/// Register width in 64-bit lanes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LaneWidth {
    #[serde(rename = "2")]
    W2,
    #[serde(rename = "4")]
    W4,
    #[serde(rename = "8")]
    W8,
}

impl LaneWidth {
    pub const ALL: [LaneWidth; 3] = [LaneWidth::W2, LaneWidth::W4, LaneWidth::W8];

    pub const fn lanes(self) -> usize {
        match self {
            LaneWidth::W2 => 2,
            LaneWidth::W4 => 4,
            LaneWidth::W8 => 8,
        }
    }

    pub const fn bits(self) -> u32 {
        64 * self.lanes() as u32
    }

    pub fn from_lanes(n: usize) -> Result<Self, LaneError> {
        match n {
            2 => Ok(LaneWidth::W2),
            4 => Ok(LaneWidth::W4),
            8 => Ok(LaneWidth::W8),
            other => Err(LaneError::UnsupportedWidth(other)),
        }
    }

    pub fn from_bits(bits: u32) -> Result<Self, LaneError> {
        Self::from_lanes(bits as usize / 64).and_then(|w| {
            if w.bits() == bits {
                Ok(w)
            } else {
                Err(LaneError::UnsupportedWidth(bits as usize / 64))
            }
        })
    }
}

impl fmt::Display for LaneWidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.lanes())
    }
}

impl FromStr for LaneWidth {
    type Err = LaneError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let n: usize = s.trim().parse().map_err(|_| LaneError::UnsupportedWidth(0))?;
        Self::from_lanes(n)
    }
}

/// How 64x64 -> 128-bit lane products are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MulMode {
    /// Separate low-half and high-half multiply instructions.
    #[default]
    Direct,
    /// Four 32x32 multiplies on operand halves with carry assembly.
    Split32,
}

impl fmt::Display for MulMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MulMode::Direct => "direct",
            MulMode::Split32 => "split32",
        })
    }
}

impl FromStr for MulMode {
    type Err = LaneError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "direct" => Ok(MulMode::Direct),
            "split32" | "split" => Ok(MulMode::Split32),
            other => Err(LaneError::UnknownMulMode(other.to_string())),
        }
    }
}

/// One register's worth of field words with a runtime lane count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VectorBatch {
    width: LaneWidth,
    lanes: [u64; 8],
}

impl VectorBatch {
    /// Builds a batch of canonical field words; the slice length picks the width.
    pub fn new(words: &[u64]) -> Result<Self, LaneError> {
        let width = LaneWidth::from_lanes(words.len())?;
        if let Some((lane, &value)) = words.iter().enumerate().find(|(_, &v)| v >= P) {
            return Err(LaneError::NotCanonical { lane, value });
        }
        Ok(Self::raw(width, words))
    }

    pub fn from_elements(elems: &[Goldilocks]) -> Result<Self, LaneError> {
        let width = LaneWidth::from_lanes(elems.len())?;
        let words: Vec<u64> = elems.iter().map(|e| e.value()).collect();
        Ok(Self::raw(width, &words))
    }

    pub fn splat(width: LaneWidth, x: Goldilocks) -> Self {
        Self::raw(width, &vec![x.value(); width.lanes()])
    }

    // Wide-product halves are arbitrary words, so they skip the canonical check.
    fn raw(width: LaneWidth, words: &[u64]) -> Self {
        let mut lanes = [0u64; 8];
        lanes[..words.len()].copy_from_slice(words);
        Self { width, lanes }
    }

    /// Batch of arbitrary 64-bit words, e.g. the halves of a wide product.
    pub fn from_words(words: &[u64]) -> Result<Self, LaneError> {
        let width = LaneWidth::from_lanes(words.len())?;
        Ok(Self::raw(width, words))
    }

    pub fn width(&self) -> LaneWidth {
        self.width
    }

    pub fn words(&self) -> &[u64] {
        &self.lanes[..self.width.lanes()]
    }

    pub fn elements(&self) -> Vec<Goldilocks> {
        self.words().iter().map(|&w| Goldilocks::reduce_u64(w)).collect()
    }

    fn to_lanes<const W: usize>(self) -> Lanes<W> {
        let mut out = [0u64; W];
        out.copy_from_slice(&self.lanes[..W]);
        Lanes(out)
    }

    fn from_lanes<const W: usize>(width: LaneWidth, l: Lanes<W>) -> Self {
        Self::raw(width, &l.0)
    }
}

/// Runtime-width vector unit, optionally counting issued instructions.
///
/// One instance per thread; merge the counters afterwards.
#[derive(Debug, Clone)]
pub struct VectorUnit {
    width: LaneWidth,
    mul_mode: MulMode,
    counters: Option<OpCounters>,
}

macro_rules! dispatch {
    ($self:ident, |$ops:ident, $w:ident| $body:expr) => {{
        let mode = $self.mul_mode;
        let width = $self.width;
        match (&mut $self.counters, width) {
            (Some(c), LaneWidth::W2) => {
                let mut $ops = LaneOps::<2, _>::new(c, mode);
                const $w: usize = 2;
                $body
            }
            (Some(c), LaneWidth::W4) => {
                let mut $ops = LaneOps::<4, _>::new(c, mode);
                const $w: usize = 4;
                $body
            }
            (Some(c), LaneWidth::W8) => {
                let mut $ops = LaneOps::<8, _>::new(c, mode);
                const $w: usize = 8;
                $body
            }
            (None, LaneWidth::W2) => {
                let mut $ops = LaneOps::<2, ()>::new((), mode);
                const $w: usize = 2;
                $body
            }
            (None, LaneWidth::W4) => {
                let mut $ops = LaneOps::<4, ()>::new((), mode);
                const $w: usize = 4;
                $body
            }
            (None, LaneWidth::W8) => {
                let mut $ops = LaneOps::<8, ()>::new((), mode);
                const $w: usize = 8;
                $body
            }
        }
    }};
}

impl VectorUnit {
    pub fn new(width: LaneWidth) -> Self {
        Self {
            width,
            mul_mode: MulMode::Direct,
            counters: None,
        }
    }

    pub fn counting(width: LaneWidth) -> Self {
        Self {
            counters: Some(OpCounters::default()),
            ..Self::new(width)
        }
    }

    pub fn with_mul_mode(mut self, mode: MulMode) -> Self {
        self.mul_mode = mode;
        self
    }

    pub fn width(&self) -> LaneWidth {
        self.width
    }

    /// Current totals, `None` unless the unit was built with [`VectorUnit::counting`].
    pub fn counters(&self) -> Option<OpCounters> {
        self.counters
    }

    pub fn reset_counters(&mut self) {
        if let Some(c) = self.counters.as_mut() {
            c.reset();
        }
    }

    fn check(&self, batches: &[&VectorBatch]) -> Result<(), LaneError> {
        for b in batches {
            if b.width != self.width {
                return Err(LaneError::WidthMismatch {
                    expected: self.width.lanes(),
                    found: b.width.lanes(),
                });
            }
        }
        Ok(())
    }

    fn binary(&mut self, a: &VectorBatch, b: &VectorBatch, op: BinaryOp) -> Result<VectorBatch, LaneError> {
        self.check(&[a, b])?;
        let width = self.width;
        Ok(dispatch!(self, |ops, W| {
            let (x, y) = (a.to_lanes::<W>(), b.to_lanes::<W>());
            let r = match op {
                BinaryOp::Add => ops.add(x, y),
                BinaryOp::Sub => ops.sub(x, y),
                BinaryOp::Mul => ops.mul(x, y),
                BinaryOp::MulU8 => ops.mul_u8(x, y),
            };
            VectorBatch::from_lanes(width, r)
        }))
    }

    pub fn vadd(&mut self, a: &VectorBatch, b: &VectorBatch) -> Result<VectorBatch, LaneError> {
        self.binary(a, b, BinaryOp::Add)
    }

    pub fn vsub(&mut self, a: &VectorBatch, b: &VectorBatch) -> Result<VectorBatch, LaneError> {
        self.binary(a, b, BinaryOp::Sub)
    }

    /// Reduced lane-wise product (widening multiply plus 128-bit reduction).
    pub fn vmul(&mut self, a: &VectorBatch, b: &VectorBatch) -> Result<VectorBatch, LaneError> {
        self.binary(a, b, BinaryOp::Mul)
    }

    pub fn vsquare(&mut self, a: &VectorBatch) -> Result<VectorBatch, LaneError> {
        self.binary(a, a, BinaryOp::Mul)
    }

    /// Product with 8-bit factors. Lanes of `b` must be below 256.
    pub fn vmul_u8(&mut self, a: &VectorBatch, b: &VectorBatch) -> Result<VectorBatch, LaneError> {
        if let Some((lane, &value)) = b.words().iter().enumerate().find(|(_, &v)| v >= 256) {
            return Err(LaneError::NotCanonical { lane, value });
        }
        self.binary(a, b, BinaryOp::MulU8)
    }

    pub fn vpow7(&mut self, a: &VectorBatch) -> Result<VectorBatch, LaneError> {
        self.check(&[a])?;
        let width = self.width;
        Ok(dispatch!(self, |ops, W| VectorBatch::from_lanes(
            width,
            ops.pow7(a.to_lanes::<W>())
        )))
    }

    /// Lane-wise 128-bit products as `(hi, lo)` word batches.
    pub fn vmul_wide(
        &mut self,
        a: &VectorBatch,
        b: &VectorBatch,
        mode: MulMode,
    ) -> Result<(VectorBatch, VectorBatch), LaneError> {
        self.check(&[a, b])?;
        let width = self.width;
        Ok(dispatch!(self, |ops, W| {
            let (x, y) = (a.to_lanes::<W>(), b.to_lanes::<W>());
            let (hi, lo) = match mode {
                MulMode::Direct => ops.mul_wide_direct(x, y),
                MulMode::Split32 => ops.mul_wide_split(x, y),
            };
            (VectorBatch::from_lanes(width, hi), VectorBatch::from_lanes(width, lo))
        }))
    }

    pub fn vreduce_128(&mut self, hi: &VectorBatch, lo: &VectorBatch) -> Result<VectorBatch, LaneError> {
        self.check(&[hi, lo])?;
        let width = self.width;
        Ok(dispatch!(self, |ops, W| {
            VectorBatch::from_lanes(width, ops.reduce_128(hi.to_lanes::<W>(), lo.to_lanes::<W>()))
        }))
    }

    /// Square transpose: `out[i][j] = rows[j][i]` for `W` rows of `W` lanes.
    pub fn transpose_block(&mut self, rows: &[VectorBatch]) -> Result<Vec<VectorBatch>, LaneError> {
        let w = self.width.lanes();
        if rows.len() != w {
            return Err(LaneError::NonSquare {
                rows: rows.len(),
                width: w,
            });
        }
        for r in rows {
            self.check(&[r])?;
        }
        let width = self.width;
        Ok(dispatch!(self, |ops, W| {
            let mut regs: Vec<Lanes<W>> = rows.iter().map(|r| r.to_lanes::<W>()).collect();
            ops.transpose(&mut regs, W);
            regs.into_iter().map(|r| VectorBatch::from_lanes(width, r)).collect()
        }))
    }
}

#[derive(Clone, Copy)]
enum BinaryOp {
    Add,
    Sub,
    Mul,
    MulU8,
}
