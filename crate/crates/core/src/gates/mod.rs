//! Circuit generators for clocked threshold logic.
//!
//! A MOBILE gate is a series pair of RTDs between a clock and ground with the
//! output at the midpoint. On the clock's rising edge the RTD with the smaller
//! effective peak current switches to its valley branch first and the other
//! one stays on its first branch, so the output latches high (load switched)
//! or low (driver switched). Input transistors in parallel with the driver
//! (positive weights) or the load (negative weights) shift that race by one
//! unit each.
//!
//! Generated subcircuits use the reserved names `FA` and `MOBILE_<OUTPUT>`.

mod adder;
mod half_adder;
mod mobile;
mod sizing;

use std::collections::BTreeMap;

use crate::devices::{InvalidParams, MfetParams, RtdParams};
use crate::netlist::Pulse;

pub use adder::{
    build_full_adder, build_ripple_adder, full_adder_logic, FullAdderSpec, RippleNodes,
    LATCH_BLEED, LATCH_CAPACITANCE, MAX_RIPPLE_BITS,
};
pub use half_adder::{
    build_diode_half_adder, logic_diode, xor_rtd, HalfAdderLevels, DIODE_MODEL, XOR_RTD_MODEL,
};
pub use mobile::{
    build_mobile_gate, gate_testbench, input_source, GateNetlist, OUTPUT_CAPACITANCE,
};

/// Largest Σ|w| a single gate may carry.
pub const FAN_IN_MAX: u32 = 6;

/// Model card names shared by every generated netlist.
pub const RTD_MODEL: &str = "RTD";
pub const MFET_MODEL: &str = "MFET";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GateError {
    #[error("sum of |weights| is {total}, above the fan-in bound {FAN_IN_MAX}")]
    WeightOverflow { total: u32 },
    #[error("threshold {threshold} outside (-{total}, {total}]")]
    UnrealizableThreshold { threshold: i32, total: u32 },
    #[error("no value for input `{0}`")]
    MissingInput(String),
    #[error("invalid gate spec: {0}")]
    InvalidSpec(String),
    #[error("invalid clock: {0}")]
    InvalidClock(String),
    #[error("ripple width {0} outside 1..={MAX_RIPPLE_BITS}")]
    Width(usize),
    #[error(transparent)]
    Devices(#[from] InvalidParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    One,
    Two,
}

impl Phase {
    pub fn index(self) -> usize {
        match self {
            Phase::One => 0,
            Phase::Two => 1,
        }
    }
}

/// Output is 1 iff `Σ weights[i]·x[i] ≥ threshold`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdGateSpec {
    pub weights: BTreeMap<String, i32>,
    pub threshold: i32,
    pub phase: Phase,
    pub output: String,
}

impl ThresholdGateSpec {
    pub fn new(weights: &[(&str, i32)], threshold: i32, phase: Phase, output: &str) -> Self {
        Self {
            weights: weights.iter().map(|(n, w)| (n.to_string(), *w)).collect(),
            threshold,
            phase,
            output: output.to_string(),
        }
    }

    pub fn majority3(output: &str) -> Self {
        Self::new(&[("a", 1), ("b", 1), ("c", 1)], 2, Phase::One, output)
    }

    pub fn total_weight(&self) -> u32 {
        self.weights.values().map(|w| w.unsigned_abs()).sum()
    }

    pub fn inputs(&self) -> impl Iterator<Item = &str> {
        self.weights.keys().map(String::as_str)
    }

    pub fn validate(&self) -> Result<(), GateError> {
        if self.weights.is_empty() {
            return Err(GateError::InvalidSpec("gate has no inputs".into()));
        }
        if let Some((name, _)) = self.weights.iter().find(|(_, w)| **w == 0) {
            return Err(GateError::InvalidSpec(format!(
                "input `{name}` has zero weight"
            )));
        }
        let total = self.total_weight();
        if total > FAN_IN_MAX {
            return Err(GateError::WeightOverflow { total });
        }
        if self.threshold <= -(total as i32) || self.threshold > total as i32 {
            return Err(GateError::UnrealizableThreshold {
                threshold: self.threshold,
                total,
            });
        }
        for name in self.weights.keys().chain(std::iter::once(&self.output)) {
            if !valid_node_name(name) {
                return Err(GateError::InvalidSpec(format!("bad node name `{name}`")));
            }
        }
        if self.weights.contains_key(&self.output) {
            return Err(GateError::InvalidSpec(format!(
                "`{}` is both input and output",
                self.output
            )));
        }
        Ok(())
    }

    /// Every input assignment in binary counting order, first input as the
    /// most significant bit.
    pub fn rows(&self) -> Vec<BTreeMap<String, bool>> {
        let names: Vec<&String> = self.weights.keys().collect();
        let k = names.len();
        (0..1usize << k)
            .map(|r| {
                names
                    .iter()
                    .enumerate()
                    .map(|(i, n)| ((*n).clone(), r >> (k - 1 - i) & 1 == 1))
                    .collect()
            })
            .collect()
    }
}

/// Names the generators reserve for ports and ground inside gate subcircuits.
const RESERVED_NODES: [&str; 6] = ["clk", "gnd", "0", "hold", "cs", "lg"];

fn valid_node_name(name: &str) -> bool {
    !name.is_empty()
        && !RESERVED_NODES.contains(&name)
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

/// Ideal logic value of a threshold gate.
pub fn threshold_truth(
    spec: &ThresholdGateSpec,
    inputs: &BTreeMap<String, bool>,
) -> Result<bool, GateError> {
    let mut sum = 0i32;
    for (name, w) in &spec.weights {
        let bit = inputs
            .get(name)
            .ok_or_else(|| GateError::MissingInput(name.clone()))?;
        if *bit {
            sum += w;
        }
    }
    Ok(sum >= spec.threshold)
}

/// Two non-overlapping clock phases sharing one period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClockSpec {
    pub v_high: f64,
    pub period: f64,
    pub rise: f64,
    pub fall: f64,
    /// Start of each phase's rising edge within the period.
    pub offsets: [f64; 2],
    /// Time between the end of one phase's falling edge and the next rise.
    pub gap: f64,
}

impl Default for ClockSpec {
    fn default() -> Self {
        Self {
            v_high: 1.0,
            period: 100e-9,
            rise: 3e-9,
            fall: 3e-9,
            offsets: [0.0, 50e-9],
            gap: 10e-9,
        }
    }
}

impl ClockSpec {
    /// Length of the high plateau, equal for both phases.
    pub fn plateau(&self) -> f64 {
        self.offsets[1] - self.offsets[0] - self.rise - self.fall - self.gap
    }

    pub fn plateau_start(&self, phase: Phase) -> f64 {
        self.offsets[phase.index()] + self.rise
    }

    pub fn pulse(&self, phase: Phase) -> Pulse {
        Pulse {
            v0: 0.0,
            v1: self.v_high,
            delay: self.offsets[phase.index()],
            rise: self.rise,
            fall: self.fall,
            width: self.plateau(),
            period: self.period,
        }
    }

    pub fn validate(&self) -> Result<(), GateError> {
        let bad = |m: &str| Err(GateError::InvalidClock(m.into()));
        let all = [
            self.v_high,
            self.period,
            self.rise,
            self.fall,
            self.offsets[0],
            self.offsets[1],
            self.gap,
        ];
        if all.iter().any(|x| !x.is_finite()) {
            return bad("non-finite value");
        }
        if self.v_high <= 0.0 || self.period <= 0.0 || self.rise <= 0.0 || self.fall <= 0.0 {
            return bad("v_high, period and edges must be positive");
        }
        if self.gap <= 0.0 {
            return bad("phases overlap: gap must be positive");
        }
        if self.offsets[0] < 0.0 || self.plateau() < 0.0 {
            return bad("phase 2 starts before phase 1 has finished");
        }
        let phase2_end = self.offsets[1] + self.rise + self.plateau() + self.fall + self.gap;
        if phase2_end > self.offsets[0] + self.period + 1e-15 {
            return bad("phase 2 overlaps the next phase 1");
        }
        Ok(())
    }
}

/// Device parameters shared by every gate in a generated circuit.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DeviceSet {
    pub rtd: RtdParams,
    pub mfet: MfetParams,
}

impl DeviceSet {
    pub fn validate(&self) -> Result<(), GateError> {
        self.rtd.validate()?;
        self.mfet.validate()?;
        Ok(())
    }
}
