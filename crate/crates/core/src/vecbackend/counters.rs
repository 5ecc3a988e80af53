use std::collections::BTreeMap;
use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

/// Abstract vector instruction classes. One recorded instruction processes
/// every lane of a register, whatever the lane count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpClass {
    Vadd,
    Vsub,
    VmulLo,
    VmulHi,
    Vshift,
    Vand,
    Vcompare,
    Vselect,
    Vload,
    Vstore,
    Vpermute,
}

impl OpClass {
    pub const ALL: [OpClass; 11] = [
        OpClass::Vadd,
        OpClass::Vsub,
        OpClass::VmulLo,
        OpClass::VmulHi,
        OpClass::Vshift,
        OpClass::Vand,
        OpClass::Vcompare,
        OpClass::Vselect,
        OpClass::Vload,
        OpClass::Vstore,
        OpClass::Vpermute,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OpClass::Vadd => "vadd",
            OpClass::Vsub => "vsub",
            OpClass::VmulLo => "vmul_lo",
            OpClass::VmulHi => "vmul_hi",
            OpClass::Vshift => "vshift",
            OpClass::Vand => "vand",
            OpClass::Vcompare => "vcompare",
            OpClass::Vselect => "vselect",
            OpClass::Vload => "vload",
            OpClass::Vstore => "vstore",
            OpClass::Vpermute => "vpermute",
        }
    }
}

/// Per-class instruction totals.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounters {
    pub vadd: u64,
    pub vsub: u64,
    pub vmul_lo: u64,
    pub vmul_hi: u64,
    pub vshift: u64,
    pub vand: u64,
    pub vcompare: u64,
    pub vselect: u64,
    pub vload: u64,
    pub vstore: u64,
    pub vpermute: u64,
}

impl OpCounters {
    pub fn get(&self, class: OpClass) -> u64 {
        match class {
            OpClass::Vadd => self.vadd,
            OpClass::Vsub => self.vsub,
            OpClass::VmulLo => self.vmul_lo,
            OpClass::VmulHi => self.vmul_hi,
            OpClass::Vshift => self.vshift,
            OpClass::Vand => self.vand,
            OpClass::Vcompare => self.vcompare,
            OpClass::Vselect => self.vselect,
            OpClass::Vload => self.vload,
            OpClass::Vstore => self.vstore,
            OpClass::Vpermute => self.vpermute,
        }
    }

    fn slot(&mut self, class: OpClass) -> &mut u64 {
        match class {
            OpClass::Vadd => &mut self.vadd,
            OpClass::Vsub => &mut self.vsub,
            OpClass::VmulLo => &mut self.vmul_lo,
            OpClass::VmulHi => &mut self.vmul_hi,
            OpClass::Vshift => &mut self.vshift,
            OpClass::Vand => &mut self.vand,
            OpClass::Vcompare => &mut self.vcompare,
            OpClass::Vselect => &mut self.vselect,
            OpClass::Vload => &mut self.vload,
            OpClass::Vstore => &mut self.vstore,
            OpClass::Vpermute => &mut self.vpermute,
        }
    }

    pub fn total(&self) -> u64 {
        OpClass::ALL.iter().map(|&c| self.get(c)).sum()
    }

    pub fn reset(&mut self) {
        *self = Self::default();
    }

    /// `{op_class: count}` view, keyed by class name.
    pub fn to_map(&self) -> BTreeMap<&'static str, u64> {
        OpClass::ALL.iter().map(|&c| (c.name(), self.get(c))).collect()
    }
}

impl AddAssign for OpCounters {
    fn add_assign(&mut self, rhs: Self) {
        for class in OpClass::ALL {
            *self.slot(class) += rhs.get(class);
        }
    }
}

/// Destination for instruction events. The unit type discards them, so a
/// non-counting backend compiles to the bare lane loops.
pub trait OpSink {
    fn record(&mut self, class: OpClass, n: u64);

    fn counters(&self) -> Option<OpCounters> {
        None
    }
}

impl OpSink for () {
    #[inline(always)]
    fn record(&mut self, _class: OpClass, _n: u64) {}
}

impl OpSink for OpCounters {
    #[inline(always)]
    fn record(&mut self, class: OpClass, n: u64) {
        *self.slot(class) += n;
    }

    fn counters(&self) -> Option<OpCounters> {
        Some(*self)
    }
}

impl<T: OpSink + ?Sized> OpSink for &mut T {
    #[inline(always)]
    fn record(&mut self, class: OpClass, n: u64) {
        (**self).record(class, n)
    }

    fn counters(&self) -> Option<OpCounters> {
        (**self).counters()
    }
}
