//! Property tests over device models, netlists, gate logic and decoding.

use proptest::prelude::*;

use molsim::devices::{diode_eval, mfet_eval, rtd_eval, DiodeParams, MfetParams, RtdParams};
use molsim::gates::{
    build_mobile_gate, full_adder_logic, threshold_truth, ClockSpec, DeviceSet, Phase,
    ThresholdGateSpec,
};
use molsim::harness::{decode, margin, plan_stimulus, Logic, LogicLevels, TruthTable};
use molsim::netlist::units::parse_value;
use molsim::netlist::{flatten, parse_netlist, serialize};

const H: f64 = 1e-6;

fn central(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    (f(x + H) - f(x - H)) / (2.0 * H)
}

fn close(analytic: f64, fd: f64, floor: f64) -> bool {
    (analytic - fd).abs() <= 1e-5 * analytic.abs().max(floor)
}

fn rtd_params() -> impl Strategy<Value = RtdParams> {
    (
        1e-5..1e-2f64,
        0.05..0.5f64,
        1.5..20.0f64,
        0.1..0.6f64,
        0.05..1.0f64,
    )
        .prop_map(|(i_peak, v_peak, pvr, gap, v_rise2)| RtdParams {
            i_peak,
            v_peak,
            i_valley: i_peak / pvr,
            v_valley: v_peak + gap,
            v_rise2,
        })
}

fn diode_params() -> impl Strategy<Value = DiodeParams> {
    (
        -16.0..-6.0f64,
        1.0..2.0f64,
        0.02..0.04f64,
        prop_oneof![Just(0.0), 1e-13..1e-9f64],
    )
        .prop_map(|(log_is, n_ideality, v_thermal, g_min)| DiodeParams {
            i_sat: 10f64.powf(log_is),
            n_ideality,
            v_thermal,
            g_min,
        })
}

fn mfet_params() -> impl Strategy<Value = MfetParams> {
    (1e-5..1e-2f64, 0.0..0.5f64, 0.0..0.2f64).prop_map(|(k_trans, v_th, lambda)| MfetParams {
        k_trans,
        v_th,
        lambda,
    })
}

fn away_from(x: f64, knots: &[f64]) -> bool {
    knots.iter().all(|k| (x - k).abs() > 1e-4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn rtd_derivative_matches_difference(p in rtd_params(), v in -2.0..2.0f64) {
        let knots = [0.0, p.v_peak, p.v_valley, -p.v_peak, -p.v_valley];
        prop_assume!(away_from(v, &knots));
        let e = rtd_eval(v, &p);
        let fd = central(|x| rtd_eval(x, &p).current, v);
        prop_assert!(close(e.d_current_d_v, fd, 1e-3 * p.i_peak / p.v_peak), "{} vs {}", e.d_current_d_v, fd);
    }

    #[test]
    fn diode_derivative_matches_difference(p in diode_params(), v in -2.0..1.5f64) {
        prop_assume!(away_from(v, &[p.v_knee()]));
        let e = diode_eval(v, &p);
        let fd = central(|x| diode_eval(x, &p).current, v);
        let floor = p.i_sat / (p.n_ideality * p.v_thermal) * 1e-3;
        prop_assert!(close(e.d_current_d_v, fd, floor), "{} vs {}", e.d_current_d_v, fd);
    }

    #[test]
    fn mfet_derivatives_match_differences(p in mfet_params(), vgs in -2.0..2.0f64, vds in -2.0..2.0f64) {
        let vov = vgs - p.v_th;
        prop_assume!(vov.abs() > 1e-4 && (vds.abs() - vov).abs() > 1e-4 && vds.abs() > 1e-4);
        prop_assume!((vgs - vds - p.v_th).abs() > 1e-4);
        let e = mfet_eval(vgs, vds, &p);
        let gm = central(|x| mfet_eval(x, vds, &p).current, vgs);
        let gds = central(|x| mfet_eval(vgs, x, &p).current, vds);
        let floor = 1e-3 * p.k_trans;
        prop_assert!(close(e.gm, gm, floor), "gm {} vs {}", e.gm, gm);
        prop_assert!(close(e.gds, gds, floor), "gds {} vs {}", e.gds, gds);
    }
}

proptest! {
    #[test]
    fn rtd_has_ndr_and_rising_branches(p in rtd_params()) {
        let n = 200;
        let mut saw_negative = false;
        for k in 1..n {
            let v = p.v_peak + (p.v_valley - p.v_peak) * k as f64 / n as f64;
            saw_negative |= rtd_eval(v, &p).d_current_d_v < 0.0;
        }
        prop_assert!(saw_negative);
        for k in 0..=n {
            let v = p.v_peak * (k as f64 / n as f64);
            prop_assert!(rtd_eval(v, &p).d_current_d_v >= 0.0);
            let w = p.v_valley + 2.0 * k as f64 / n as f64;
            prop_assert!(rtd_eval(w, &p).d_current_d_v >= 0.0);
        }
    }

    #[test]
    fn rtd_is_odd(p in rtd_params(), v in -10.0..10.0f64) {
        prop_assert_eq!(rtd_eval(-v, &p).current, -rtd_eval(v, &p).current);
    }

    #[test]
    fn diode_blocks_reverse_current(p in diode_params(), v in 1e-6..10.0f64) {
        let i = diode_eval(-v, &p).current;
        prop_assert!(i.abs() <= p.i_sat + p.g_min * v + 1e-18);
    }

    #[test]
    fn models_are_finite(
        r in rtd_params(), d in diode_params(), m in mfet_params(),
        a in -10.0..10.0f64, b in -10.0..10.0f64,
    ) {
        let rt = rtd_eval(a, &r);
        let di = diode_eval(a, &d);
        let mf = mfet_eval(a, b, &m);
        for x in [rt.current, rt.d_current_d_v, di.current, di.d_current_d_v, mf.current, mf.gm, mf.gds] {
            prop_assert!(x.is_finite());
        }
    }

    #[test]
    fn suffix_law(n in 0u32..1_000_000) {
        let k = parse_value(&format!("{n}k")).unwrap();
        prop_assert_eq!(k, parse_value(&format!("{n}000")).unwrap());
        prop_assert_eq!(k, parse_value(&format!("{n}e3")).unwrap());
        let m = parse_value(&format!("{n}meg")).unwrap();
        prop_assert_eq!(m, parse_value(&format!("{n}e6")).unwrap());
    }
}

fn gate_spec() -> impl Strategy<Value = ThresholdGateSpec> {
    let names = ["a", "b", "c", "d"];
    prop::collection::vec(prop_oneof![-2..=-1i32, 1..=2i32], 1..=4)
        .prop_filter("fan-in", |w| {
            w.iter().map(|x| x.unsigned_abs()).sum::<u32>() <= 6
        })
        .prop_flat_map(move |w| {
            let total = w.iter().map(|x| x.abs()).sum::<i32>();
            let weights: Vec<(String, i32)> = w
                .iter()
                .enumerate()
                .map(|(i, &x)| (names[i].to_string(), x))
                .collect();
            (Just(weights), (1 - total)..=total, prop::bool::ANY)
        })
        .prop_map(|(weights, threshold, two)| ThresholdGateSpec {
            weights: weights.into_iter().collect(),
            threshold,
            phase: if two { Phase::Two } else { Phase::One },
            output: "y".into(),
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_gates_round_trip(spec in gate_spec()) {
        let gate = build_mobile_gate(&spec, &DeviceSet::default(), &ClockSpec::default()).unwrap();
        let text = serialize(&gate.netlist);
        let back = parse_netlist(&text).unwrap();
        prop_assert_eq!(&back, &gate.netlist);
        prop_assert_eq!(serialize(&back), text);
    }

    #[test]
    fn flattening_a_flat_netlist_is_isomorphic(spec in gate_spec()) {
        let clock = ClockSpec::default();
        let gate = build_mobile_gate(&spec, &DeviceSet::default(), &clock).unwrap();
        let bench = molsim::gates::gate_testbench(&gate, &clock);
        let flat = flatten(&bench).unwrap();
        let again = flatten(&flat.to_netlist("flat")).unwrap();
        prop_assert_eq!(flat.node_count(), again.node_count());
        prop_assert_eq!(flat.elements().len(), again.elements().len());
        for (x, y) in flat.elements().iter().zip(again.elements()) {
            prop_assert_eq!(&x.device, &y.device);
            let names = |c: &molsim::netlist::FlatCircuit, e: &molsim::netlist::Element| -> Vec<String> {
                e.nodes.iter().map(|&n| c.node_names()[n].clone()).collect()
            };
            prop_assert_eq!(names(&flat, x), names(&again, y));
        }
    }

    #[test]
    fn negated_weights_complement_the_function(spec in gate_spec()) {
        let dual = ThresholdGateSpec {
            weights: spec.weights.iter().map(|(n, w)| (n.clone(), -w)).collect(),
            threshold: 1 - spec.threshold,
            ..spec.clone()
        };
        prop_assert!(dual.validate().is_ok());
        for row in spec.rows() {
            prop_assert_eq!(
                threshold_truth(&dual, &row).unwrap(),
                !threshold_truth(&spec, &row).unwrap()
            );
        }
    }

    #[test]
    fn sample_instants_sit_inside_plateaus(
        period in 50e-9..500e-9f64,
        edge_frac in 0.001..0.02f64,
        gap_frac in 0.01..0.2f64,
    ) {
        let edge = edge_frac * period;
        let clock = ClockSpec {
            v_high: 1.0,
            period,
            rise: edge,
            fall: edge,
            offsets: [0.0, period / 2.0],
            gap: gap_frac * period,
        };
        let table = TruthTable::full_adder();
        match plan_stimulus(&table, &[true, false, true], &clock) {
            Ok(plan) => {
                let phases = [Phase::Two, Phase::One];
                for (t, phase) in plan.samples.iter().zip(phases) {
                    let t = t.unwrap();
                    let start = clock.plateau_start(phase);
                    prop_assert!(t > start && t < start + clock.plateau());
                }
            }
            Err(_) => prop_assert!(clock.plateau() < 10.0 * edge),
        }
    }
}

proptest! {
    #[test]
    fn full_adder_is_binary_addition(a: bool, b: bool, c: bool) {
        let total = a as u8 + b as u8 + c as u8;
        prop_assert_eq!(full_adder_logic(a, b, c), (total & 1 == 1, total >= 2));
    }

    #[test]
    fn ripple_table_is_addition(bits in 1usize..=4, row in any::<u32>()) {
        let table = TruthTable::ripple(bits);
        let row = row as usize % table.expected.len();
        let x = table.row_bits(row);
        let word = |s: &[bool]| s.iter().fold(0u32, |acc, &b| acc << 1 | b as u32);
        let total = word(&x[..bits]) + word(&x[bits..2 * bits]) + x[2 * bits] as u32;
        let got = table.expected[row]
            .iter()
            .enumerate()
            .fold(0u32, |acc, (k, &b)| acc | (b as u32) << k);
        prop_assert_eq!(got, total);
    }

    #[test]
    fn decoded_outputs_have_nonnegative_margin(v_dd in 0.5..5.0f64, lo in 0.05..0.45f64, hi in 0.55..0.95f64, x in -1.0..6.0f64) {
        let levels = LogicLevels { v_dd, v_il: lo * v_dd, v_ih: hi * v_dd };
        prop_assert!(levels.validate().is_ok());
        let m = margin(x, &levels);
        match decode(x, &levels) {
            Logic::Indeterminate => prop_assert!(m < 0.0),
            _ => prop_assert!(m >= 0.0),
        }
    }

    #[test]
    fn threshold_truth_matches_weighted_sum(spec in gate_spec()) {
        for row in spec.rows() {
            let sum: i32 = spec.weights.iter().map(|(n, w)| if row[n] { *w } else { 0 }).sum();
            let expect = sum >= spec.threshold;
            prop_assert_eq!(threshold_truth(&spec, &row).unwrap(), expect);
        }
    }
}
