//! Analytical what-if model for wider vector registers, higher clocks and
//! the power and cost they imply.
//!
//! Timing follows `T = C / f = I / (IPC * f)`. Widening registers scales the
//! instruction count by a ratio `rho(width)` relative to 128-bit registers;
//! with IPC held constant, cycles scale the same way, and raising the clock
//! by `m` divides the time by `m`:
//!
//! ```text
//! T' = T * rho(width) / m
//! ```
//!
//! Power: a CPU draws static `(1 - d)` and dynamic `d` shares; multiplying
//! dynamic power by `mu` gives `(1 - d) + d * mu`. If the CPU is a share `s`
//! of datacenter power, the datacenter uplift is `(1 - s) + s * cpu`, and
//! with energy at a share `gamma` of total cost the cost grows by
//! `gamma * (datacenter - 1)`. Voltage and frequency are treated as
//! independent, which is the model's main simplification.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WhatIfError {
    #[error("parameter {name} = {value} is out of range ({expected})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("unsupported register width {0} (expected 128, 256 or 512)")]
    UnsupportedWidth(u32),
    #[error("csv error: {0}")]
    Csv(String),
}

fn positive(name: &'static str, value: f64) -> Result<f64, WhatIfError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(WhatIfError::OutOfRange {
            name,
            value,
            expected: "finite and > 0",
        })
    }
}

fn unit(name: &'static str, value: f64) -> Result<f64, WhatIfError> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(WhatIfError::OutOfRange {
            name,
            value,
            expected: "within [0, 1]",
        })
    }
}

/// Rounds a percentage to two decimals, ties to even.
pub fn round_percent(x: f64) -> f64 {
    (x * 100.0).round_ties_even() / 100.0
}

/// A measured run: instruction count, cycle count and clock frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasuredProfile {
    pub instructions: f64,
    pub cycles: f64,
    pub frequency_hz: f64,
}

impl MeasuredProfile {
    pub fn new(instructions: f64, cycles: f64, frequency_hz: f64) -> Result<Self, WhatIfError> {
        Ok(Self {
            instructions: positive("instructions", instructions)?,
            cycles: positive("cycles", cycles)?,
            frequency_hz: positive("frequency_hz", frequency_hz)?,
        })
    }

    /// A profile whose time is `seconds`, at one instruction per cycle and 1 GHz.
    pub fn from_seconds(seconds: f64) -> Result<Self, WhatIfError> {
        let cycles = positive("seconds", seconds)? * 1e9;
        Self::new(cycles, cycles, 1e9)
    }

    pub fn ipc(&self) -> f64 {
        self.instructions / self.cycles
    }

    pub fn time(&self) -> f64 {
        self.cycles / self.frequency_hz
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegisterWidth {
    W128,
    W256,
    W512,
}

impl RegisterWidth {
    pub const ALL: [RegisterWidth; 3] = [RegisterWidth::W128, RegisterWidth::W256, RegisterWidth::W512];

    pub fn bits(self) -> u32 {
        match self {
            RegisterWidth::W128 => 128,
            RegisterWidth::W256 => 256,
            RegisterWidth::W512 => 512,
        }
    }

    pub fn from_bits(bits: u32) -> Result<Self, WhatIfError> {
        match bits {
            128 => Ok(RegisterWidth::W128),
            256 => Ok(RegisterWidth::W256),
            512 => Ok(RegisterWidth::W512),
            other => Err(WhatIfError::UnsupportedWidth(other)),
        }
    }
}

impl fmt::Display for RegisterWidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bits())
    }
}

impl FromStr for RegisterWidth {
    type Err = WhatIfError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bits = s.trim().parse().map_err(|_| WhatIfError::UnsupportedWidth(0))?;
        Self::from_bits(bits)
    }
}

impl Serialize for RegisterWidth {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_u32(self.bits())
    }
}

impl<'de> Deserialize<'de> for RegisterWidth {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Self::from_bits(u32::deserialize(deserializer)?).map_err(serde::de::Error::custom)
    }
}

/// Instruction-count ratios relative to 128-bit registers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstructionRatios {
    pub r256: f64,
    pub r512: f64,
    /// Where the numbers come from.
    pub source: String,
}

impl Default for InstructionRatios {
    /// Whole-program emulator counts for Merkle building: 45.7% and 54.7%
    /// fewer instructions at 256 and 512 bits.
    fn default() -> Self {
        Self {
            r256: 0.543,
            r512: 0.453,
            source: "published: whole-program emulator counts".into(),
        }
    }
}

impl InstructionRatios {
    pub fn new(r256: f64, r512: f64, source: impl Into<String>) -> Result<Self, WhatIfError> {
        for (name, v) in [("rho(256)", r256), ("rho(512)", r512)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(WhatIfError::OutOfRange {
                    name,
                    value: v,
                    expected: "within (0, 1]",
                });
            }
        }
        Ok(Self {
            r256,
            r512,
            source: source.into(),
        })
    }

    /// Ratios from abstract instruction totals at 2, 4 and 8 lanes.
    pub fn from_counts(w2: u64, w4: u64, w8: u64) -> Result<Self, WhatIfError> {
        positive("w2 total", w2 as f64)?;
        Self::new(
            w4 as f64 / w2 as f64,
            w8 as f64 / w2 as f64,
            "counting backend: abstract vector instructions",
        )
    }

    pub fn ratio(&self, width: RegisterWidth) -> f64 {
        match width {
            RegisterWidth::W128 => 1.0,
            RegisterWidth::W256 => self.r256,
            RegisterWidth::W512 => self.r512,
        }
    }
}

/// `rho(width)` with the default ratios.
pub fn register_width_ratio(bits: u32) -> Result<f64, WhatIfError> {
    Ok(InstructionRatios::default().ratio(RegisterWidth::from_bits(bits)?))
}

/// Frequency multiplier `m` and register width, with the ratio it implies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WhatIfScenario {
    pub freq_multiplier: f64,
    pub register_width: RegisterWidth,
    pub instruction_ratio: f64,
}

impl WhatIfScenario {
    pub fn new(
        freq_multiplier: f64,
        register_width: RegisterWidth,
        ratios: &InstructionRatios,
    ) -> Result<Self, WhatIfError> {
        Ok(Self {
            freq_multiplier: positive("m", freq_multiplier)?,
            register_width,
            instruction_ratio: ratios.ratio(register_width),
        })
    }

    /// Scenario with an explicit ratio; 128-bit scenarios must use 1.
    pub fn with_ratio(freq_multiplier: f64, register_width: RegisterWidth, ratio: f64) -> Result<Self, WhatIfError> {
        let expected = if register_width == RegisterWidth::W128 {
            ratio == 1.0
        } else {
            ratio > 0.0 && ratio <= 1.0
        };
        if !expected {
            return Err(WhatIfError::OutOfRange {
                name: "rho",
                value: ratio,
                expected: "1 at 128 bits, within (0, 1] otherwise",
            });
        }
        Ok(Self {
            freq_multiplier: positive("m", freq_multiplier)?,
            register_width,
            instruction_ratio: ratio,
        })
    }

    /// Clock change from `from_ghz` to `to_ghz` at the given width.
    pub fn clock_change(
        from_ghz: f64,
        to_ghz: f64,
        width: RegisterWidth,
        ratios: &InstructionRatios,
    ) -> Result<Self, WhatIfError> {
        Self::new(
            positive("to_ghz", to_ghz)? / positive("from_ghz", from_ghz)?,
            width,
            ratios,
        )
    }
}

/// `T' = (C / f) * rho / m`.
pub fn predict_time(profile: &MeasuredProfile, scenario: &WhatIfScenario) -> f64 {
    profile.time() * scenario.instruction_ratio / scenario.freq_multiplier
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerCostModel {
    /// Dynamic share `d` of CPU power.
    pub dynamic_fraction: f64,
    /// Factor `mu` on dynamic power.
    pub dynamic_multiplier: f64,
    /// CPU share `s` of datacenter power.
    pub cpu_share: f64,
    /// Energy share `gamma` of total cost of ownership.
    pub energy_cost_share: f64,
}

impl Default for PowerCostModel {
    fn default() -> Self {
        Self {
            dynamic_fraction: 0.8,
            dynamic_multiplier: 2.0,
            cpu_share: 0.61,
            energy_cost_share: 0.05,
        }
    }
}

impl PowerCostModel {
    pub fn new(d: f64, mu: f64, s: f64, gamma: f64) -> Result<Self, WhatIfError> {
        Ok(Self {
            dynamic_fraction: unit("d", d)?,
            dynamic_multiplier: positive("mu", mu)?,
            cpu_share: unit("s", s)?,
            energy_cost_share: unit("gamma", gamma)?,
        })
    }

    pub fn with_gamma(self, gamma: f64) -> Result<Self, WhatIfError> {
        Self::new(self.dynamic_fraction, self.dynamic_multiplier, self.cpu_share, gamma)
    }
}

/// `(1 - d) + d * mu`.
pub fn cpu_power_uplift(model: &PowerCostModel) -> f64 {
    (1.0 - model.dynamic_fraction) + model.dynamic_fraction * model.dynamic_multiplier
}

/// `(1 - s) + s * cpu_power_uplift`.
pub fn datacenter_power_uplift(model: &PowerCostModel) -> f64 {
    (1.0 - model.cpu_share) + model.cpu_share * cpu_power_uplift(model)
}

/// Fractional growth of total cost: `gamma * (datacenter_power_uplift - 1)`.
pub fn cost_increment(model: &PowerCostModel) -> f64 {
    model.energy_cost_share * (datacenter_power_uplift(model) - 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRow {
    pub freq_multiplier: f64,
    pub register_width: RegisterWidth,
    pub instruction_ratio: f64,
    /// Time relative to the reference machine.
    pub normalized_time: f64,
    /// `(1 - normalized_time) * 100`, two decimals.
    pub improvement_percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSummary {
    pub cpu_power_uplift: f64,
    pub datacenter_power_uplift: f64,
    pub energy_cost_share: f64,
    pub cost_increment_percent: f64,
}

impl PowerSummary {
    pub fn of(model: &PowerCostModel) -> Self {
        Self {
            cpu_power_uplift: cpu_power_uplift(model),
            datacenter_power_uplift: datacenter_power_uplift(model),
            energy_cost_share: model.energy_cost_share,
            cost_increment_percent: round_percent(cost_increment(model) * 100.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub baseline_ratio: f64,
    pub ratio_source: String,
    pub rows: Vec<ScenarioRow>,
    pub power: Option<PowerSummary>,
}

pub const SCENARIO_CSV_COLUMNS: [&str; 5] = [
    "freq_multiplier",
    "register_width",
    "instruction_ratio",
    "normalized_time",
    "improvement_percent",
];

impl ScenarioReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> Result<String, WhatIfError> {
        let err = |e: csv::Error| WhatIfError::Csv(e.to_string());
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(SCENARIO_CSV_COLUMNS).map_err(err)?;
        for r in &self.rows {
            w.write_record([
                r.freq_multiplier.to_string(),
                r.register_width.to_string(),
                r.instruction_ratio.to_string(),
                r.normalized_time.to_string(),
                format!("{:.2}", r.improvement_percent),
            ])
            .map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| WhatIfError::Csv(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }
}

/// Normalized time `baseline_ratio * rho / m` for each scenario.
pub fn scenario_report(
    baseline_ratio: f64,
    scenarios: &[WhatIfScenario],
    ratio_source: &str,
) -> Result<ScenarioReport, WhatIfError> {
    positive("baseline_ratio", baseline_ratio)?;
    let rows = scenarios
        .iter()
        .map(|s| {
            let t = baseline_ratio * s.instruction_ratio / s.freq_multiplier;
            ScenarioRow {
                freq_multiplier: s.freq_multiplier,
                register_width: s.register_width,
                instruction_ratio: s.instruction_ratio,
                normalized_time: t,
                improvement_percent: round_percent((1.0 - t) * 100.0),
            }
        })
        .collect();
    Ok(ScenarioReport {
        baseline_ratio,
        ratio_source: ratio_source.to_string(),
        rows,
        power: None,
    })
}
