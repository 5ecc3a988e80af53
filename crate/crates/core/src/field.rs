//! Scalar arithmetic over the Goldilocks field, `p = 2^64 - 2^32 + 1`.
//!
//! Every [`Goldilocks`] value is canonical (`< P`). The functions here are the
//! normative definitions; the lane backends in [`crate::vecbackend`] must agree
//! with them bit for bit.
//!
//! All word arithmetic is explicit: `wrapping_*`/`overflowing_*` carry the
//! carry and borrow flags, nothing relies on ambient overflow behaviour.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// The Goldilocks prime.
pub const P: u64 = 0xFFFF_FFFF_0000_0001;

/// `2^64 mod P = 2^32 - 1`.
pub const EPSILON: u64 = 0xFFFF_FFFF;

const LOW32: u64 = 0xFFFF_FFFF;
const SIGN_BIT: u64 = 1 << 63;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("value {0} is not a canonical Goldilocks element (must be < {P})")]
    NotCanonical(u64),
    #[error("cannot parse field element from {0:?}")]
    Parse(String),
    #[error("expected 8 bytes for a field element, got {0}")]
    ByteLength(usize),
}

/// A canonical residue modulo [`P`].
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(transparent)]
pub struct Goldilocks(u64);

impl Goldilocks {
    pub const ZERO: Self = Self(0);
    pub const ONE: Self = Self(1);
    pub const NEG_ONE: Self = Self(P - 1);

    /// Checked constructor; rejects anything `>= P`.
    pub const fn new(value: u64) -> Result<Self, FieldError> {
        if value < P {
            Ok(Self(value))
        } else {
            Err(FieldError::NotCanonical(value))
        }
    }

    /// Wraps a word the caller already knows is canonical.
    #[inline(always)]
    pub const fn from_canonical(value: u64) -> Self {
        debug_assert!(value < P);
        Self(value)
    }

    /// Reduces an arbitrary 64-bit word. One subtraction suffices since `2^64 < 2P`.
    #[inline]
    pub const fn reduce_u64(value: u64) -> Self {
        if value >= P {
            Self(value - P)
        } else {
            Self(value)
        }
    }

    #[inline(always)]
    pub const fn value(self) -> u64 {
        self.0
    }

    pub fn to_le_bytes(self) -> [u8; 8] {
        self.0.to_le_bytes()
    }

    pub fn from_le_bytes(bytes: &[u8]) -> Result<Self, FieldError> {
        let arr: [u8; 8] = bytes.try_into().map_err(|_| FieldError::ByteLength(bytes.len()))?;
        Self::new(u64::from_le_bytes(arr))
    }

    pub fn square(self) -> Self {
        square(self)
    }

    pub fn pow7(self) -> Self {
        pow7(self)
    }
}

impl fmt::Debug for Goldilocks {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Goldilocks {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl FromStr for Goldilocks {
    type Err = FieldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim();
        let value = trimmed
            .parse::<u64>()
            .map_err(|_| FieldError::Parse(trimmed.to_string()))?;
        Self::new(value)
    }
}

impl TryFrom<u64> for Goldilocks {
    type Error = FieldError;

    fn try_from(value: u64) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<Goldilocks> for u64 {
    fn from(x: Goldilocks) -> u64 {
        x.0
    }
}

// Decimal strings keep exact 64-bit values through JSON readers that parse
// numbers as doubles.
impl Serialize for Goldilocks {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Goldilocks {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A full 128-bit product `hi * 2^64 + lo`, never implicitly reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct WideProduct {
    pub hi: u64,
    pub lo: u64,
}

impl WideProduct {
    pub const fn new(hi: u64, lo: u64) -> Self {
        Self { hi, lo }
    }

    pub const fn from_u128(x: u128) -> Self {
        Self {
            hi: (x >> 64) as u64,
            lo: x as u64,
        }
    }

    pub const fn to_u128(self) -> u128 {
        ((self.hi as u128) << 64) | self.lo as u128
    }
}

/// Maps a word below `2P` to its canonical representative.
///
/// The AVX reference path needs this because its `add`/`sub` tolerate inputs up
/// to `2P`. Every 64-bit word is already below `2P`, so there is no rejected
/// input.
#[inline]
pub const fn to_canonical(x: u64) -> Goldilocks {
    Goldilocks::reduce_u64(x)
}

/// Unsigned addition: `c = a + b`, subtract `P` when `b >= P - a`.
#[inline]
pub fn add(a: Goldilocks, b: Goldilocks) -> Goldilocks {
    let c = a.0.wrapping_add(b.0);
    // a < P, so P - a never underflows
    let d = P - a.0;
    if b.0 >= d {
        Goldilocks(c.wrapping_sub(P))
    } else {
        Goldilocks(c)
    }
}

/// Unsigned subtraction: `c = a - b`, add `P` back when it borrowed.
#[inline]
pub fn sub(a: Goldilocks, b: Goldilocks) -> Goldilocks {
    let c = a.0.wrapping_sub(b.0);
    if a.0 < b.0 {
        Goldilocks(c.wrapping_add(P))
    } else {
        Goldilocks(c)
    }
}

#[inline]
pub fn neg(a: Goldilocks) -> Goldilocks {
    sub(Goldilocks::ZERO, a)
}

#[inline(always)]
fn shift(x: u64) -> i64 {
    (x ^ SIGN_BIT) as i64
}

#[inline(always)]
fn unshift(x: i64) -> u64 {
    (x as u64) ^ SIGN_BIT
}

/// Canonicalization in the sign-shifted domain: a signed compare of shifted
/// words is an unsigned compare of the originals.
#[inline(always)]
fn to_canonical_shifted(x_s: i64) -> i64 {
    if x_s >= shift(P) {
        x_s.wrapping_sub(P as i64)
    } else {
        x_s
    }
}

/// Signed-integer addition with the `2^63` operand shift, as the AVX code does
/// it. Accepts non-canonical words (anything below `2P`).
pub fn add_signed_ref(a: u64, b: u64) -> Goldilocks {
    let a_sc = to_canonical_shifted(shift(a));
    let mut c_s = a_sc.wrapping_add(b as i64);
    // shifted a_sc > shifted sum  <=>  the unsigned sum wrapped past 2^64
    if a_sc > c_s {
        c_s = c_s.wrapping_sub(P as i64);
    }
    to_canonical(unshift(c_s))
}

/// Signed-integer subtraction counterpart of [`add_signed_ref`].
pub fn sub_signed_ref(a: u64, b: u64) -> Goldilocks {
    let a_s = shift(a);
    let b_sc = to_canonical_shifted(shift(b));
    let mut c = a_s.wrapping_sub(b_sc);
    if b_sc > a_s {
        c = c.wrapping_add(P as i64);
    }
    // both operands carried the shift, so the difference is unshifted already
    to_canonical(c as u64)
}

/// 128-bit product through a native high/low multiply pair.
#[inline]
pub fn mul_wide_direct(a: Goldilocks, b: Goldilocks) -> WideProduct {
    let lo = a.0.wrapping_mul(b.0);
    let hi = ((a.0 as u128 * b.0 as u128) >> 64) as u64;
    WideProduct { hi, lo }
}

/// 128-bit product from four 32x32-bit multiplies with explicit carry assembly,
/// for ISAs without a high-half multiply.
pub fn mul_wide_split(a: Goldilocks, b: Goldilocks) -> WideProduct {
    let (a, b) = (a.0, b.0);
    let a_h = a >> 32;
    let b_h = b >> 32;
    let a_l = a & LOW32;
    let b_l = b & LOW32;

    let c_hh = a_h.wrapping_mul(b_h);
    let c_hl = a_h.wrapping_mul(b_l);
    let c_lh = a_l.wrapping_mul(b_h);
    let c_ll = a_l.wrapping_mul(b_l);

    // (2^32-1)^2 + (2^32-1) < 2^64: neither partial sum can carry out
    let r0 = c_hl.wrapping_add(c_ll >> 32);
    let r1 = c_lh.wrapping_add(r0 & LOW32);

    let lo = (r1 << 32) | (c_ll & LOW32);
    let hi = c_hh.wrapping_add(r0 >> 32).wrapping_add(r1 >> 32);
    WideProduct { hi, lo }
}

/// Reduces any 128-bit value using `2^64 = 2^32 - 1` and `2^96 = -1 (mod P)`:
/// `r = r_hl * (2^32 - 1) + r_l - r_hh`.
#[inline]
pub fn reduce_128(r: WideProduct) -> Goldilocks {
    let r_l = r.lo;
    let r_hh = r.hi >> 32;
    let r_hl = r.hi & LOW32;

    let (mut tmp1, borrow) = r_l.overflowing_sub(r_hh);
    if borrow {
        // wrapped by 2^64; 2^64 - P = 2^32 - 1, cannot borrow again since r_hh < 2^32
        tmp1 = tmp1.wrapping_sub(EPSILON);
    }
    let tmp2 = r_hl * EPSILON;

    let (res, carry) = tmp1.overflowing_add(tmp2);
    let res = if carry {
        // res < tmp2 <= 2^64 - 2^33 + 1, so this lands below P
        res.wrapping_add(EPSILON)
    } else if res >= P {
        res - P
    } else {
        res
    };
    Goldilocks(res)
}

#[inline]
pub fn mul(a: Goldilocks, b: Goldilocks) -> Goldilocks {
    reduce_128(mul_wide_direct(a, b))
}

#[inline]
pub fn square(a: Goldilocks) -> Goldilocks {
    mul(a, a)
}

/// Product with an 8-bit factor; the intermediate fits in 72 bits.
///
/// With `hi <= 254`, `t = hi * (2^32 - 1) < 2^40` and `s = lo + t`. If the add
/// carries, the wrapped `s` is below `2^40` and adding `2^32 - 1` (for the lost
/// `2^64`) stays canonical. Otherwise `s < 2^64 < 2P` needs at most one
/// subtraction of `P`. Exactly one of the two fix-ups can fire.
#[inline]
pub fn mult_72(a: Goldilocks, b: u8) -> Goldilocks {
    let prod = a.0 as u128 * b as u128;
    let lo = prod as u64;
    let hi = (prod >> 64) as u64;
    let t = hi * EPSILON;
    let (s, carry) = lo.overflowing_add(t);
    let res = if carry {
        s + EPSILON
    } else if s >= P {
        s - P
    } else {
        s
    };
    Goldilocks(res)
}

/// `a^7` as `a^4 * a^3`: two squarings and two multiplies.
#[inline]
pub fn pow7(a: Goldilocks) -> Goldilocks {
    let x2 = square(a);
    let x3 = mul(x2, a);
    let x4 = square(x2);
    mul(x4, x3)
}

impl Add for Goldilocks {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        add(self, rhs)
    }
}

impl Sub for Goldilocks {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        sub(self, rhs)
    }
}

impl Mul for Goldilocks {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        mul(self, rhs)
    }
}

impl Neg for Goldilocks {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        neg(self)
    }
}

impl AddAssign for Goldilocks {
    fn add_assign(&mut self, rhs: Self) {
        *self = add(*self, rhs);
    }
}

impl SubAssign for Goldilocks {
    fn sub_assign(&mut self, rhs: Self) {
        *self = sub(*self, rhs);
    }
}

impl MulAssign for Goldilocks {
    fn mul_assign(&mut self, rhs: Self) {
        *self = mul(*self, rhs);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(x: u64) -> Goldilocks {
        Goldilocks::new(x).unwrap()
    }

    // u128 arithmetic is independent of the word-level reduction paths
    fn oracle_mul(a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % P as u128) as u64
    }

    #[test]
    fn canonical_constructor() {
        assert_eq!(Goldilocks::new(P), Err(FieldError::NotCanonical(P)));
        assert!(Goldilocks::new(P - 1).is_ok());
        assert_eq!(to_canonical(0), Goldilocks::ZERO);
        assert_eq!(to_canonical(P), Goldilocks::ZERO);
        assert_eq!(to_canonical(P + 5), g(5));
        assert_eq!(to_canonical(u64::MAX), g(EPSILON - 1));
    }

    #[test]
    fn add_examples() {
        assert_eq!(add(g(0), g(0)), g(0));
        assert_eq!(add(g(P - 1), g(1)), g(0));
        assert_eq!(add(g(1 << 63), g(1 << 63)), g(4294967295));
        assert_eq!(add(g(P - 1), g(P - 1)), g(P - 2));
    }

    #[test]
    fn sub_examples() {
        assert_eq!(sub(g(5), g(5)), g(0));
        assert_eq!(sub(g(0), g(1)), g(P - 1));
        assert_eq!(sub(g(1), g(P - 1)), g(2));
    }

    #[test]
    fn signed_reference_examples() {
        assert_eq!(add_signed_ref(0, 0), g(0));
        assert_eq!(add_signed_ref(P, 1), g(1));
        assert_eq!(
            add_signed_ref(u64::MAX, u64::MAX),
            g(((2 * (u64::MAX as u128)) % P as u128) as u64)
        );
        assert_eq!(sub_signed_ref(0, 0), g(0));
        assert_eq!(sub_signed_ref(1, P), g(1));
        assert_eq!(sub_signed_ref(P, 1), g(P - 1));
        assert_eq!(sub_signed_ref(u64::MAX, 3), g(EPSILON - 4));
    }

    #[test]
    fn wide_multiply_examples() {
        let x = g(0xdead_beef_1234);
        assert_eq!(mul_wide_direct(g(0), x), WideProduct::new(0, 0));
        assert_eq!(mul_wide_direct(g(1), x), WideProduct::new(0, x.value()));
        assert_eq!(mul_wide_direct(g(1 << 32), g(1 << 32)), WideProduct::new(1, 0));
        assert_eq!(mul_wide_split(g(0), g(0)), WideProduct::new(0, 0));
        assert_eq!(
            mul_wide_split(g(LOW32), g(LOW32)),
            WideProduct::new(0, u64::MAX - (1 << 33) + 2)
        );
        let (a, b) = (g(P - 1), g(P - 2));
        assert_eq!(mul_wide_split(a, b), mul_wide_direct(a, b));
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(reduce_128(WideProduct::new(0, 0)), g(0));
        assert_eq!(reduce_128(WideProduct::new(1, 0)), g(4294967295));
        assert_eq!(reduce_128(WideProduct::new(1 << 32, 0)), g(18446744069414584320));
        assert_eq!(reduce_128(WideProduct::new(u64::MAX, u64::MAX)), {
            g((u128::MAX % P as u128) as u64)
        });
        // borrow branch: r_hh > r_l
        assert_eq!(
            reduce_128(WideProduct::new(5 << 32, 3)),
            g((((5u128 << 96) + 3) % P as u128) as u64)
        );
    }

    #[test]
    fn mul_square_pow7_examples() {
        let x = g(123_456_789_012);
        assert_eq!(mul(g(1), x), x);
        assert_eq!(mul(g(1 << 32), g(1 << 32)), g(4294967295));
        assert_eq!(mul(g(P - 1), g(P - 1)), g(1));
        assert_eq!(square(g(0)), g(0));
        assert_eq!(square(g(P - 1)), g(1));
        assert_eq!(square(g(1 << 32)), g(4294967295));
        assert_eq!(pow7(g(0)), g(0));
        assert_eq!(pow7(g(1)), g(1));
        assert_eq!(pow7(g(2)), g(128));
    }

    #[test]
    fn mult_72_examples() {
        let x = g(0x1234_5678_9abc);
        assert_eq!(mult_72(x, 0), g(0));
        assert_eq!(mult_72(x, 1), x);
        assert_eq!(mult_72(g(1 << 63), 255), g(oracle_mul(1 << 63, 255)));
        assert_eq!(mult_72(g(P - 1), 255), g(P - 255));
        for b in 0..=255u8 {
            for a in [0, 1, EPSILON, 1 << 32, 1 << 63, P - 1, P - 2, 0xFFFF_FFFE_FFFF_FFFF] {
                let a = Goldilocks::reduce_u64(a);
                assert_eq!(mult_72(a, b).value(), oracle_mul(a.value(), b as u64), "{a} * {b}");
            }
        }
    }

    #[test]
    fn byte_and_string_round_trip() {
        let x = g(P - 7);
        assert_eq!(Goldilocks::from_le_bytes(&x.to_le_bytes()).unwrap(), x);
        assert_eq!(
            Goldilocks::from_le_bytes(&P.to_le_bytes()),
            Err(FieldError::NotCanonical(P))
        );
        assert_eq!(Goldilocks::from_le_bytes(&[0; 7]), Err(FieldError::ByteLength(7)));
        assert_eq!("42".parse::<Goldilocks>().unwrap(), g(42));
        assert!("18446744069414584321".parse::<Goldilocks>().is_err());
        assert!("x".parse::<Goldilocks>().is_err());
        let json = serde_json::to_string(&x).unwrap();
        assert_eq!(json, format!("\"{}\"", P - 7));
        assert_eq!(serde_json::from_str::<Goldilocks>(&json).unwrap(), x);
    }

    #[test]
    fn operators_delegate() {
        let (a, b) = (g(P - 3), g(10));
        assert_eq!(a + b, add(a, b));
        assert_eq!(a - b, sub(a, b));
        assert_eq!(a * b, mul(a, b));
        assert_eq!(-a, g(3));
        assert_eq!(-Goldilocks::ZERO, Goldilocks::ZERO);
        let mut c = a;
        c += b;
        c -= b;
        c *= Goldilocks::ONE;
        assert_eq!(c, a);
    }
}
