//! Generated circuits simulated row by row against their Boolean oracles.

use molsim::gates::{
    build_diode_half_adder, build_full_adder, build_mobile_gate, build_ripple_adder,
    gate_testbench, logic_diode, ClockSpec, DeviceSet, FullAdderSpec, HalfAdderLevels, Phase,
    ThresholdGateSpec,
};
use molsim::harness::{
    verify_dc_table, verify_truth_table, LogicLevels, TruthTable, TruthTableReport,
};
use molsim::solver::{IntegrationMethod, SolverOptions, TransientOptions};

fn tran(clock: &ClockSpec, cycles: usize) -> TransientOptions {
    TransientOptions::new(
        cycles as f64 * clock.period,
        0.25e-9,
        IntegrationMethod::BackwardEuler,
    )
}

fn run_gate(spec: &ThresholdGateSpec, devices: &DeviceSet) -> TruthTableReport {
    let clock = ClockSpec::default();
    let gate = build_mobile_gate(spec, devices, &clock).unwrap();
    let bench = gate_testbench(&gate, &clock);
    verify_truth_table(
        &bench,
        &TruthTable::gate(spec),
        &LogicLevels::default(),
        &clock,
        &tran(&clock, 1),
        &SolverOptions::default(),
    )
    .unwrap()
}

fn assert_all_pass(report: &TruthTableReport) {
    assert!(report.all_pass(), "\n{}", report.to_text());
}

#[test]
fn buffer_and_inverter() {
    let d = DeviceSet::default();
    assert_all_pass(&run_gate(
        &ThresholdGateSpec::new(&[("a", 1)], 1, Phase::One, "y"),
        &d,
    ));
    assert_all_pass(&run_gate(
        &ThresholdGateSpec::new(&[("a", -1)], 0, Phase::One, "y"),
        &d,
    ));
}

#[test]
fn and_or_majority() {
    let d = DeviceSet::default();
    assert_all_pass(&run_gate(
        &ThresholdGateSpec::new(&[("a", 1), ("b", 1)], 2, Phase::One, "y"),
        &d,
    ));
    assert_all_pass(&run_gate(
        &ThresholdGateSpec::new(&[("a", 1), ("b", 1)], 1, Phase::One, "y"),
        &d,
    ));
    assert_all_pass(&run_gate(&ThresholdGateSpec::majority3("m"), &d));
}

#[test]
fn phase_two_gate() {
    let spec = ThresholdGateSpec::new(&[("a", 1), ("b", 1)], 2, Phase::Two, "y");
    assert_all_pass(&run_gate(&spec, &DeviceSet::default()));
}

#[test]
fn negated_weights_give_the_complement() {
    let d = DeviceSet::default();
    let and = ThresholdGateSpec::new(&[("a", 1), ("b", 1)], 2, Phase::One, "y");
    let nand = ThresholdGateSpec::new(&[("a", -1), ("b", -1)], -1, Phase::One, "y");
    let r_and = run_gate(&and, &d);
    let r_nand = run_gate(&nand, &d);
    assert_all_pass(&r_and);
    assert_all_pass(&r_nand);
    for (x, y) in r_and.rows.iter().zip(&r_nand.rows) {
        assert_eq!(x.expected[0], !y.expected[0]);
    }
}

#[test]
fn full_adder_truth_table() {
    let spec = FullAdderSpec::default();
    let circuit = build_full_adder(&spec).unwrap();
    let report = verify_truth_table(
        &circuit,
        &TruthTable::full_adder(),
        &LogicLevels::default(),
        &spec.clock,
        &tran(&spec.clock, 1),
        &SolverOptions::default(),
    )
    .unwrap();
    assert_all_pass(&report);
    assert_eq!(report.rows.len(), 8);
    assert!(report.worst_margin() >= 0.1, "\n{}", report.to_text());
}

#[test]
fn two_bit_ripple_adder() {
    let spec = FullAdderSpec::default();
    let circuit = build_ripple_adder(2, &spec).unwrap();
    let report = verify_truth_table(
        &circuit,
        &TruthTable::ripple(2),
        &LogicLevels::default(),
        &spec.clock,
        &tran(&spec.clock, 2),
        &SolverOptions::default(),
    )
    .unwrap();
    assert_eq!(report.rows.len(), 32);
    assert_all_pass(&report);
}

#[test]
fn half_adder_at_dc() {
    let circuit = build_diode_half_adder(&logic_diode(), 10e3).unwrap();
    let table = TruthTable::half_adder(&HalfAdderLevels::default(), 1.0);
    let report = verify_dc_table(
        &circuit,
        &table,
        &LogicLevels::default(),
        &SolverOptions::default(),
    )
    .unwrap();
    assert_all_pass(&report);
}

#[test]
fn weak_rtds_fail_without_crashing() {
    let mut devices = DeviceSet::default();
    // peak-to-valley ratio 1.05
    devices.rtd.i_valley = devices.rtd.i_peak / 1.05;
    let spec = FullAdderSpec {
        devices,
        ..FullAdderSpec::default()
    };
    let circuit = build_full_adder(&spec).unwrap();
    let report = verify_truth_table(
        &circuit,
        &TruthTable::full_adder(),
        &LogicLevels::default(),
        &spec.clock,
        &tran(&spec.clock, 1),
        &SolverOptions::default(),
    )
    .unwrap();
    assert_eq!(report.rows.len(), 8);
    assert!(!report.all_pass(), "\n{}", report.to_text());
}
