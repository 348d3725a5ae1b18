//! Two-clock full adder and its ripple-carry composition.
//!
//! The carry gate `MAJ3(a, b, cin)` evaluates on phase 1. Two pass
//! transistors copy the carry onto storage capacitors that stay valid after
//! phase 1 resets:
//!
//! - `hold`, gated by the phase-1 clock, feeds the next stage's carry-in;
//! - `cs`, gated by a resistive division of the phase-1 clock, feeds the sum
//!   gate at a lower level (see [`sum_latch_ratio`]).
//!
//! The sum gate `[a + b + cin − 2·cs ≥ 1]` evaluates on phase 2. Large
//! bleed resistors give the storage nodes a DC path so the operating point
//! at `t = 0` is well defined.
//!
//! Per full adder: 4 RTDs and 10 transistors (3 carry inputs, 3 sum inputs,
//! 2 unit transistors for the −2 carry weight, 2 latches).
//!
//! Ripple schedule: stage `k` reads the held carry of stage `k − 1` as its
//! carry-in, so its carry is settled on phase 1 of cycle `k` (counting from
//! 0) and its sum on phase 2 of the same cycle. An `n`-bit adder therefore
//! needs `n` clock periods; all sums and the final carry are read in cycle
//! `n − 1`.

use std::collections::BTreeMap;

use super::mobile::{add_models, build_gate, input_source};
use super::sizing::output_high_level;
use super::{
    threshold_truth, ClockSpec, DeviceSet, GateError, GateNetlist, Phase, ThresholdGateSpec,
    MFET_MODEL,
};
use crate::netlist::{Directive, ElementDecl, ElementKind, Netlist, SourceSpec, SubcktDef, GROUND};
use crate::solver::IntegrationMethod;

pub const LATCH_CAPACITANCE: f64 = 100e-15;
pub const LATCH_BLEED: f64 = 100e6;
pub const MAX_RIPPLE_BITS: usize = 8;

/// Allowance for a held carry that has not fully charged to its limit, as
/// seen by the sum gate on phase 2.
const HELD_DROOP: f64 = 0.03;

/// Dip of the upstream held carry while the next carry gate evaluates: the
/// upstream latch is transparent during the phase-1 ramp, before its own
/// carry has switched high.
const CHAIN_DROOP: f64 = 0.06;

/// Total resistance of the sum-side latch gate divider.
const DIVIDER_TOTAL: f64 = 1e6;

fn round6(x: f64) -> f64 {
    format!("{x:.6e}").parse().unwrap()
}

const FA_PORTS: [&str; 9] = [
    "a", "b", "cin", "sum", "cout", "hold", "clk1", "clk2", "gnd",
];

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FullAdderSpec {
    pub clock: ClockSpec,
    pub devices: DeviceSet,
}

fn carry_spec() -> ThresholdGateSpec {
    ThresholdGateSpec::new(&[("a", 1), ("b", 1), ("cin", 1)], 2, Phase::One, "cout")
}

fn sum_spec() -> ThresholdGateSpec {
    ThresholdGateSpec::new(
        &[("a", 1), ("b", 1), ("cin", 1), ("cout", -2)],
        1,
        Phase::Two,
        "sum",
    )
}

/// `(sum, cout)` of the two composed threshold gates.
pub fn full_adder_logic(a: bool, b: bool, cin: bool) -> (bool, bool) {
    let mut row: BTreeMap<String, bool> = [("a", a), ("b", b), ("cin", cin)]
        .iter()
        .map(|(n, v)| (n.to_string(), *v))
        .collect();
    let cout = threshold_truth(&carry_spec(), &row).expect("complete row");
    row.insert("cout".into(), cout);
    let sum = threshold_truth(&sum_spec(), &row).expect("complete row");
    (sum, cout)
}

/// Logic-high voltage left on a latch node whose pass transistor gate sits
/// at `v_gate`: a source follower stops one threshold below its gate unless
/// the carry output itself is lower.
fn held_high(spec: &FullAdderSpec, v_gate: f64) -> f64 {
    let out = output_high_level(&spec.devices.rtd, spec.clock.v_high);
    (v_gate - spec.devices.mfet.v_th)
        .min(out)
        .clamp(0.0, spec.clock.v_high)
}

/// Fraction of the phase-1 clock applied to the sum-side latch gate. The
/// copy of the carry then holds at `v_high − v_peak`, where a load-side unit
/// transistor draws the same current as a driver-side unit driven from the
/// rail, which balances the −2 carry weight against the positive inputs.
fn sum_latch_ratio(spec: &FullAdderSpec) -> f64 {
    let v = spec.clock.v_high;
    ((v - spec.devices.rtd.v_peak + spec.devices.mfet.v_th) / v).clamp(0.05, 1.0)
}

/// Gates plus the `FA` subcircuit, without any top-level elements.
fn adder_library(spec: &FullAdderSpec) -> Result<(Netlist, [GateNetlist; 2]), GateError> {
    let ratio = sum_latch_ratio(spec);
    let held = held_high(spec, spec.clock.v_high);
    let held_sum = held_high(spec, ratio * spec.clock.v_high);
    let mut carry_cases = vec![BTreeMap::new()];
    let mut sum_cases = Vec::new();
    for droop in [CHAIN_DROOP, 0.0] {
        carry_cases.push(BTreeMap::from([("cin".to_string(), held - droop)]));
    }
    for droop in [HELD_DROOP, 0.0] {
        let chain = held - droop;
        let copy = held_sum - droop;
        sum_cases.push(BTreeMap::from([("cout".to_string(), copy)]));
        sum_cases.push(BTreeMap::from([
            ("cin".to_string(), chain),
            ("cout".to_string(), copy),
        ]));
    }
    let carry = build_gate(&carry_spec(), &spec.devices, &spec.clock, &carry_cases)?;
    let sum = build_gate(&sum_spec(), &spec.devices, &spec.clock, &sum_cases)?;

    let fa = SubcktDef {
        name: "FA".into(),
        ports: FA_PORTS.iter().map(|p| p.to_string()).collect(),
        elements: vec![
            ElementDecl::instance(
                "XCARRY",
                &["a", "b", "cin", "cout", "clk1", "gnd"],
                &carry.name,
            ),
            ElementDecl::device(
                "MLATCH",
                ElementKind::Mfet,
                &["cout", "clk1", "hold"],
                MFET_MODEL,
            ),
            ElementDecl::capacitor("CHOLD", "hold", "gnd", LATCH_CAPACITANCE),
            ElementDecl::resistor("RBLEED", "hold", "gnd", LATCH_BLEED),
            ElementDecl::resistor(
                "RGATE1",
                "clk1",
                "lg",
                round6((1.0 - ratio) * DIVIDER_TOTAL),
            ),
            ElementDecl::resistor("RGATE2", "lg", "gnd", round6(ratio * DIVIDER_TOTAL)),
            ElementDecl::device(
                "MLATCHS",
                ElementKind::Mfet,
                &["cout", "lg", "cs"],
                MFET_MODEL,
            ),
            ElementDecl::capacitor("CCOPY", "cs", "gnd", LATCH_CAPACITANCE),
            ElementDecl::resistor("RBLEEDS", "cs", "gnd", LATCH_BLEED),
            ElementDecl::instance(
                "XSUM",
                &["a", "b", "cin", "cs", "sum", "clk2", "gnd"],
                &sum.name,
            ),
        ],
    };
    let mut lib = Netlist::default();
    add_models(&mut lib, &spec.devices);
    for g in [&carry, &sum] {
        lib.add_subckt(g.subckt().clone());
    }
    lib.add_subckt(fa);
    Ok((lib, [carry, sum]))
}

fn add_clocks(n: &mut Netlist, clock: &ClockSpec) {
    for (name, node, phase) in [("VCLK1", "clk1", Phase::One), ("VCLK2", "clk2", Phase::Two)] {
        n.elements.push(ElementDecl::vsource(
            name,
            node,
            GROUND,
            SourceSpec::Pulse(clock.pulse(phase)),
        ));
    }
}

fn add_inputs(n: &mut Netlist, names: &[String]) {
    for input in names {
        n.elements.push(ElementDecl::vsource(
            &input_source(input),
            input,
            GROUND,
            SourceSpec::Dc(0.0),
        ));
    }
}

/// One full adder with clock sources `VCLK1`/`VCLK2`, input sources
/// `VA`, `VB`, `VCIN` (0 V until a test sets them) and outputs on nodes
/// `sum` and `cout`.
pub fn build_full_adder(spec: &FullAdderSpec) -> Result<Netlist, GateError> {
    let (lib, _) = adder_library(spec)?;
    let mut n = Netlist {
        title: "two-clock MOBILE full adder".into(),
        ..lib
    };
    add_clocks(&mut n, &spec.clock);
    add_inputs(&mut n, &["a".into(), "b".into(), "cin".into()]);
    let mut nodes = FA_PORTS.to_vec();
    nodes[8] = GROUND;
    n.elements.push(ElementDecl::instance("XFA", &nodes, "FA"));
    n.directives.push(Directive::Tran {
        step: 0.25e-9,
        stop: spec.clock.period,
        method: Some(IntegrationMethod::BackwardEuler),
    });
    Ok(n)
}

/// Node names of an `n`-bit ripple adder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RippleNodes {
    pub a: Vec<String>,
    pub b: Vec<String>,
    pub cin: String,
    pub sum: Vec<String>,
    pub cout: String,
}

impl RippleNodes {
    pub fn new(bits: usize) -> Self {
        Self {
            a: (0..bits).map(|k| format!("a{k}")).collect(),
            b: (0..bits).map(|k| format!("b{k}")).collect(),
            cin: "cin".into(),
            sum: (0..bits).map(|k| format!("s{k}")).collect(),
            cout: "cout".into(),
        }
    }

    /// Inputs in binary counting order: `a` bits from most significant,
    /// then `b` likewise, then `cin`.
    pub fn inputs(&self) -> Vec<String> {
        let mut v: Vec<String> = self.a.iter().rev().cloned().collect();
        v.extend(self.b.iter().rev().cloned());
        v.push(self.cin.clone());
        v
    }
}

/// `bits` full adders chained through their held carries. Inputs `a<k>`,
/// `b<k>` (bit `k`, least significant first) and `cin`, sources named by
/// [`input_source`]; outputs `s<k>` and `cout`. The transient directive
/// covers the `bits` clock periods the schedule needs.
pub fn build_ripple_adder(bits: usize, spec: &FullAdderSpec) -> Result<Netlist, GateError> {
    if !(1..=MAX_RIPPLE_BITS).contains(&bits) {
        return Err(GateError::Width(bits));
    }
    let (lib, _) = adder_library(spec)?;
    let nodes = RippleNodes::new(bits);
    let mut n = Netlist {
        title: format!("{bits}-bit ripple-carry MOBILE adder"),
        ..lib
    };
    add_clocks(&mut n, &spec.clock);
    let mut inputs: Vec<String> = Vec::new();
    for k in 0..bits {
        inputs.push(nodes.a[k].clone());
        inputs.push(nodes.b[k].clone());
    }
    inputs.push(nodes.cin.clone());
    add_inputs(&mut n, &inputs);
    for k in 0..bits {
        let cin = if k == 0 {
            nodes.cin.clone()
        } else {
            format!("h{}", k - 1)
        };
        let cout = if k + 1 == bits {
            nodes.cout.clone()
        } else {
            format!("c{}", k + 1)
        };
        let hold = format!("h{k}");
        let ports = [
            nodes.a[k].as_str(),
            nodes.b[k].as_str(),
            cin.as_str(),
            nodes.sum[k].as_str(),
            cout.as_str(),
            hold.as_str(),
            "clk1",
            "clk2",
            GROUND,
        ];
        n.elements
            .push(ElementDecl::instance(&format!("XFA{k}"), &ports, "FA"));
    }
    n.directives.push(Directive::Tran {
        step: 0.25e-9,
        stop: bits as f64 * spec.clock.period,
        method: Some(IntegrationMethod::BackwardEuler),
    });
    Ok(n)
}
