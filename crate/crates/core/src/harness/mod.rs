//! Logic-level verification of generated circuits.
//!
//! A [`TruthTable`] names the sources that drive each input and the nodes
//! (and clock phase/cycle) at which each output is read. Every row is an
//! independent transient run; the analog samples are decoded against
//! [`LogicLevels`] and collected into a [`TruthTableReport`].

mod iv;
mod verify;

use crate::gates::{
    full_adder_logic, input_source, threshold_truth, ClockSpec, GateError, HalfAdderLevels, Phase,
    RippleNodes, ThresholdGateSpec,
};
use crate::netlist::{NetlistError, SourceSpec};
use crate::solver::SolverError;

pub use iv::{analyze_iv, IvShapeReport};
pub use verify::{verify_dc_table, verify_truth_table, RowReport, TruthTableReport};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HarnessError {
    #[error("schedule error: {0}")]
    Schedule(String),
    #[error("invalid logic levels: {0}")]
    Levels(String),
    #[error("circuit has no voltage source `{0}`")]
    MissingSource(String),
    #[error("circuit has no node `{0}`")]
    MissingNode(String),
    #[error("row {row}: {source}")]
    Row { row: usize, source: SolverError },
    #[error("I-V shape not found: {0}")]
    ShapeNotFound(String),
    #[error("invalid I-V trace: {0}")]
    InvalidTrace(String),
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error(transparent)]
    Gate(#[from] GateError),
}

/// Voltage bands for decoding: at most `v_il` is 0, at least `v_ih` is 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogicLevels {
    pub v_dd: f64,
    pub v_il: f64,
    pub v_ih: f64,
}

impl LogicLevels {
    /// 20 % / 80 % of the supply.
    pub fn for_supply(v_dd: f64) -> Self {
        Self {
            v_dd,
            v_il: 0.2 * v_dd,
            v_ih: 0.8 * v_dd,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if 0.0 < self.v_il && self.v_il < self.v_ih && self.v_ih < self.v_dd {
            Ok(())
        } else {
            Err(HarnessError::Levels(format!(
                "need 0 < v_il < v_ih < v_dd, got {} / {} / {}",
                self.v_il, self.v_ih, self.v_dd
            )))
        }
    }
}

impl Default for LogicLevels {
    fn default() -> Self {
        Self::for_supply(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Logic {
    Low,
    High,
    Indeterminate,
}

impl Logic {
    pub fn bit(self) -> Option<bool> {
        match self {
            Logic::Low => Some(false),
            Logic::High => Some(true),
            Logic::Indeterminate => None,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Logic::Low => '0',
            Logic::High => '1',
            Logic::Indeterminate => 'X',
        }
    }
}

pub fn decode(v: f64, levels: &LogicLevels) -> Logic {
    if v <= levels.v_il {
        Logic::Low
    } else if v >= levels.v_ih {
        Logic::High
    } else {
        Logic::Indeterminate
    }
}

/// Distance from the nearer edge of the forbidden band; negative inside it.
pub fn margin(v: f64, levels: &LogicLevels) -> f64 {
    if v <= levels.v_il {
        levels.v_il - v
    } else if v >= levels.v_ih {
        v - levels.v_ih
    } else {
        -(v - levels.v_il).min(levels.v_ih - v)
    }
}

/// When an output is read.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sample {
    /// Late in the high plateau of `phase` during clock period `cycle`.
    Clocked { phase: Phase, cycle: usize },
    /// DC operating point.
    Dc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputProbe {
    pub name: String,
    pub node: String,
    pub sample: Sample,
    /// Decision levels for this output when they differ from the table's.
    pub levels: Option<LogicLevels>,
}

/// Expected behaviour of a circuit over all input combinations.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthTable {
    /// `(column name, driving source)` per input, most significant first.
    pub inputs: Vec<(String, String)>,
    pub outputs: Vec<OutputProbe>,
    /// Expected output bits per row, rows in binary counting order.
    pub expected: Vec<Vec<bool>>,
}

impl TruthTable {
    fn from_fn(
        inputs: Vec<(String, String)>,
        outputs: Vec<OutputProbe>,
        f: impl Fn(&[bool]) -> Vec<bool>,
    ) -> Self {
        let k = inputs.len();
        let expected = (0..1usize << k).map(|r| f(&row_bits(r, k))).collect();
        Self {
            inputs,
            outputs,
            expected,
        }
    }

    pub fn row_bits(&self, row: usize) -> Vec<bool> {
        row_bits(row, self.inputs.len())
    }

    /// One generated gate in its testbench (see `gates::gate_testbench`).
    pub fn gate(spec: &ThresholdGateSpec) -> Self {
        let inputs = spec
            .inputs()
            .map(|n| (n.to_string(), input_source(n)))
            .collect();
        let outputs = vec![clocked(&spec.output, &spec.output, spec.phase, 0)];
        let names: Vec<String> = spec.inputs().map(str::to_string).collect();
        Self::from_fn(inputs, outputs, |bits| {
            let row = names.iter().cloned().zip(bits.iter().copied()).collect();
            vec![threshold_truth(spec, &row).expect("row covers all inputs")]
        })
    }

    /// The two-clock full adder from `gates::build_full_adder`.
    pub fn full_adder() -> Self {
        let inputs = ["a", "b", "cin"]
            .iter()
            .map(|n| (n.to_string(), input_source(n)))
            .collect();
        let outputs = vec![
            clocked("sum", "sum", Phase::Two, 0),
            clocked("cout", "cout", Phase::One, 0),
        ];
        Self::from_fn(inputs, outputs, |b| {
            let (s, c) = full_adder_logic(b[0], b[1], b[2]);
            vec![s, c]
        })
    }

    /// An adder from `gates::build_ripple_adder`, read in the last cycle.
    pub fn ripple(bits: usize) -> Self {
        let nodes = RippleNodes::new(bits);
        let inputs = nodes
            .inputs()
            .into_iter()
            .map(|n| {
                let s = input_source(&n);
                (n, s)
            })
            .collect();
        let last = bits - 1;
        let mut outputs: Vec<OutputProbe> = nodes
            .sum
            .iter()
            .map(|s| clocked(s, s, Phase::Two, last))
            .collect();
        outputs.push(clocked(&nodes.cout, &nodes.cout, Phase::One, last));
        Self::from_fn(inputs, outputs, |b| {
            let word = |bits: &[bool]| bits.iter().fold(0u32, |acc, &x| acc << 1 | x as u32);
            let a = word(&b[..bits]);
            let bb = word(&b[bits..2 * bits]);
            let total = a + bb + b[2 * bits] as u32;
            (0..=bits).map(|k| total >> k & 1 == 1).collect()
        })
    }

    /// The diode half adder from `gates::build_diode_half_adder`, at DC.
    pub fn half_adder(levels: &HalfAdderLevels, v_dd: f64) -> Self {
        let inputs = vec![("a".into(), "VA".into()), ("b".into(), "VB".into())];
        let probe = |name: &str, (v_il, v_ih): (f64, f64)| OutputProbe {
            name: name.into(),
            node: name.into(),
            sample: Sample::Dc,
            levels: Some(LogicLevels { v_dd, v_il, v_ih }),
        };
        let outputs = vec![probe("sum", levels.sum), probe("carry", levels.carry)];
        Self::from_fn(inputs, outputs, |b| vec![b[0] ^ b[1], b[0] && b[1]])
    }
}

fn clocked(name: &str, node: &str, phase: Phase, cycle: usize) -> OutputProbe {
    OutputProbe {
        name: name.into(),
        node: node.into(),
        sample: Sample::Clocked { phase, cycle },
        levels: None,
    }
}

fn row_bits(row: usize, k: usize) -> Vec<bool> {
    (0..k).map(|i| row >> (k - 1 - i) & 1 == 1).collect()
}

/// Source settings and sample instants for one truth-table row.
#[derive(Debug, Clone, PartialEq)]
pub struct StimulusPlan {
    pub sources: Vec<(String, SourceSpec)>,
    /// Sample time per output, `None` for DC outputs.
    pub samples: Vec<Option<f64>>,
}

/// Inputs are held at the rails for the whole run; clocked outputs are read
/// at 90 % of their phase's high plateau.
pub fn plan_stimulus(
    table: &TruthTable,
    bits: &[bool],
    clock: &ClockSpec,
) -> Result<StimulusPlan, HarnessError> {
    if bits.len() != table.inputs.len() {
        return Err(HarnessError::Schedule(format!(
            "row has {} bits for {} inputs",
            bits.len(),
            table.inputs.len()
        )));
    }
    let needs_clock = table
        .outputs
        .iter()
        .any(|o| matches!(o.sample, Sample::Clocked { .. }));
    if needs_clock {
        let edge = clock.rise.max(clock.fall);
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(clock.plateau() >= 10.0 * edge) {
            return Err(HarnessError::Schedule(format!(
                "plateau {:.3e} s is shorter than 10 edge times ({:.3e} s)",
                clock.plateau(),
                10.0 * edge
            )));
        }
    }
    let sources = table
        .inputs
        .iter()
        .zip(bits)
        .map(|((_, src), &b)| {
            (
                src.clone(),
                SourceSpec::Dc(if b { clock.v_high } else { 0.0 }),
            )
        })
        .collect();
    let samples = table
        .outputs
        .iter()
        .map(|o| match o.sample {
            Sample::Clocked { phase, cycle } => Some(
                cycle as f64 * clock.period + clock.plateau_start(phase) + 0.9 * clock.plateau(),
            ),
            Sample::Dc => None,
        })
        .collect();
    Ok(StimulusPlan { sources, samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decode_bands() {
        let l = LogicLevels::default();
        assert_eq!(decode(0.05, &l), Logic::Low);
        assert_eq!(decode(0.5, &l), Logic::Indeterminate);
        assert_eq!(decode(0.8, &l), Logic::High);
        assert_eq!(decode(0.2, &l), Logic::Low);
    }

    #[test]
    fn margins() {
        let l = LogicLevels::default();
        assert!((margin(0.05, &l) - 0.15).abs() < 1e-12);
        assert!((margin(0.95, &l) - 0.15).abs() < 1e-12);
        assert!((margin(0.3, &l) + 0.1).abs() < 1e-12);
    }

    #[test]
    fn levels_validate() {
        assert!(LogicLevels::default().validate().is_ok());
        let bad = LogicLevels {
            v_dd: 1.0,
            v_il: 0.8,
            v_ih: 0.2,
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn full_adder_row_plan() {
        let t = TruthTable::full_adder();
        let clock = ClockSpec::default();
        let plan = plan_stimulus(&t, &[true, false, true], &clock).unwrap();
        assert_eq!(
            plan.sources,
            vec![
                ("VA".to_string(), SourceSpec::Dc(1.0)),
                ("VB".to_string(), SourceSpec::Dc(0.0)),
                ("VCIN".to_string(), SourceSpec::Dc(1.0)),
            ]
        );
        // cout: phase 1 plateau starts at 3 ns and lasts 34 ns
        let cout = plan.samples[1].unwrap();
        assert!((cout - 33.6e-9).abs() < 1e-15);
        let sum = plan.samples[0].unwrap();
        assert!((sum - 83.6e-9).abs() < 1e-15);
        for (t, phase) in [(cout, Phase::One), (sum, Phase::Two)] {
            let p = clock.pulse(phase);
            assert_eq!(p.value_at(t), clock.v_high);
            let start = clock.plateau_start(phase);
            assert!(t > start && t < start + clock.plateau());
        }
    }

    #[test]
    fn all_zero_row() {
        let t = TruthTable::full_adder();
        let plan = plan_stimulus(&t, &[false; 3], &ClockSpec::default()).unwrap();
        assert!(plan.sources.iter().all(|(_, s)| *s == SourceSpec::Dc(0.0)));
    }

    #[test]
    fn zero_plateau_is_a_schedule_error() {
        let clock = ClockSpec {
            offsets: [0.0, 16e-9],
            ..ClockSpec::default()
        };
        assert!(clock.plateau().abs() < 1e-18);
        let t = TruthTable::full_adder();
        assert!(matches!(
            plan_stimulus(&t, &[false; 3], &clock),
            Err(HarnessError::Schedule(_))
        ));
    }

    #[test]
    fn table_shapes() {
        assert_eq!(TruthTable::full_adder().expected.len(), 8);
        let r = TruthTable::ripple(2);
        assert_eq!(r.expected.len(), 32);
        // a=11, b=01, cin=0 -> sum 00, cout 1
        #[allow(clippy::unusual_byte_groupings)]
        let row = 0b11_01_0;
        assert_eq!(r.expected[row], vec![false, false, true]);
        let maj = TruthTable::gate(&ThresholdGateSpec::majority3("m"));
        assert_eq!(maj.expected.iter().filter(|e| e[0]).count(), 4);
    }
}
