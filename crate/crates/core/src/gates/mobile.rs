use std::collections::BTreeMap;

use super::sizing::{size_driver, Drive};
use super::{
    threshold_truth, ClockSpec, DeviceSet, GateError, ThresholdGateSpec, MFET_MODEL, RTD_MODEL,
};
use crate::netlist::{
    Directive, ElementDecl, ElementKind, ModelCard, Netlist, SourceSpec, SubcktDef, GROUND,
};
use crate::solver::IntegrationMethod;

/// Capacitance from each gate output to ground.
pub const OUTPUT_CAPACITANCE: f64 = 10e-15;

/// Area of every load RTD; driver areas are sized relative to it.
pub(crate) const LOAD_AREA: f64 = 2.0;

/// One generated MOBILE gate: its subcircuit plus the shared model cards.
///
/// Ports are the inputs in name order, then the output, `clk` and `gnd`.
#[derive(Debug, Clone, PartialEq)]
pub struct GateNetlist {
    pub netlist: Netlist,
    pub name: String,
    pub spec: ThresholdGateSpec,
    pub driver_area: f64,
    pub load_area: f64,
    /// Driver areas for which the sizing analysis decides every row
    /// correctly; empty when `window.0 >= window.1`.
    pub window: (f64, f64),
}

impl GateNetlist {
    pub fn subckt(&self) -> &SubcktDef {
        &self.netlist.subckts[&self.name]
    }

    pub fn ports(&self) -> &[String] {
        &self.subckt().ports
    }
}

/// Build a gate whose inputs swing between 0 and the clock's high level.
pub fn build_mobile_gate(
    spec: &ThresholdGateSpec,
    devices: &DeviceSet,
    clock: &ClockSpec,
) -> Result<GateNetlist, GateError> {
    build_gate(spec, devices, clock, &[])
}

/// Like [`build_mobile_gate`], but some inputs may present a logic-high
/// level below the rail (for example a latched node one threshold drop
/// down). Each scenario maps such inputs to their level; inputs it does not
/// mention sit at the rail. The sizing covers every scenario, and the
/// all-rail case when `scenarios` is empty.
pub(crate) fn build_gate(
    spec: &ThresholdGateSpec,
    devices: &DeviceSet,
    clock: &ClockSpec,
    scenarios: &[BTreeMap<String, f64>],
) -> Result<GateNetlist, GateError> {
    spec.validate()?;
    devices.validate()?;
    clock.validate()?;

    let rail = [BTreeMap::new()];
    let scenarios = if scenarios.is_empty() {
        &rail[..]
    } else {
        scenarios
    };
    let mut cases = Vec::new();
    for (row, levels) in spec
        .rows()
        .into_iter()
        .flat_map(|r| scenarios.iter().map(move |s| (r.clone(), s)))
    {
        let expected = threshold_truth(spec, &row)?;
        let on: Vec<(&String, i32)> = spec
            .weights
            .iter()
            .filter(|(n, _)| row[*n])
            .map(|(n, w)| (n, *w))
            .collect();
        let mut drive = Drive {
            driver_side: vec![],
            load_side: vec![],
        };
        for (name, w) in on {
            let v = levels.get(name).copied().unwrap_or(clock.v_high);
            let side = if w > 0 {
                &mut drive.driver_side
            } else {
                &mut drive.load_side
            };
            side.extend(std::iter::repeat_n(v, w.unsigned_abs() as usize));
        }
        cases.push((drive, expected));
    }
    let sizing = size_driver(&devices.rtd, &devices.mfet, LOAD_AREA, &cases, clock.v_high);

    let name = format!("MOBILE_{}", spec.output.to_ascii_uppercase());
    let out = spec.output.as_str();
    let mut ports: Vec<String> = spec.weights.keys().cloned().collect();
    ports.extend([out.to_string(), "clk".into(), "gnd".into()]);

    let mut elements = vec![
        ElementDecl::device("TDRV", ElementKind::Rtd, &["clk", out], RTD_MODEL)
            .with_area(round_area(sizing.driver_area)),
        ElementDecl::device("TLOAD", ElementKind::Rtd, &[out, "gnd"], RTD_MODEL)
            .with_area(LOAD_AREA),
    ];
    for (input, w) in &spec.weights {
        for k in 1..=w.unsigned_abs() {
            let e = if *w > 0 {
                let n = format!("MP_{input}_{k}");
                ElementDecl::device(&n, ElementKind::Mfet, &["clk", input, out], MFET_MODEL)
            } else {
                let n = format!("MN_{input}_{k}");
                ElementDecl::device(&n, ElementKind::Mfet, &[out, input, "gnd"], MFET_MODEL)
            };
            elements.push(e);
        }
    }
    elements.push(ElementDecl::capacitor(
        "COUT",
        out,
        "gnd",
        OUTPUT_CAPACITANCE,
    ));

    let mut netlist = Netlist::new(format!("MOBILE gate {}", spec.output));
    add_models(&mut netlist, devices);
    netlist.add_subckt(SubcktDef {
        name: name.clone(),
        ports,
        elements,
    });
    Ok(GateNetlist {
        netlist,
        name,
        spec: spec.clone(),
        driver_area: round_area(sizing.driver_area),
        load_area: LOAD_AREA,
        window: sizing.window,
    })
}

/// Areas are written with six significant digits so the emitted text is
/// stable and round-trips exactly.
fn round_area(a: f64) -> f64 {
    format!("{a:.6e}").parse().unwrap()
}

pub(crate) fn add_models(netlist: &mut Netlist, devices: &DeviceSet) {
    netlist.add_model(ModelCard::rtd(RTD_MODEL, &devices.rtd));
    netlist.add_model(ModelCard::mfet(MFET_MODEL, &devices.mfet));
}

/// Top-level circuit exercising one gate under its own clock phase: a
/// `VCLK` pulse source, one DC source `V<INPUT>` per input (initially 0 V)
/// and instance `XG`. The output node keeps the gate's output name.
pub fn gate_testbench(gate: &GateNetlist, clock: &ClockSpec) -> Netlist {
    let mut n = gate.netlist.clone();
    n.title = format!("MOBILE gate {} testbench", gate.spec.output);
    n.elements.push(ElementDecl::vsource(
        "VCLK",
        "clk",
        GROUND,
        SourceSpec::Pulse(clock.pulse(gate.spec.phase)),
    ));
    for input in gate.spec.inputs() {
        n.elements.push(ElementDecl::vsource(
            &input_source(input),
            input,
            GROUND,
            SourceSpec::Dc(0.0),
        ));
    }
    let mut nodes: Vec<&str> = gate.spec.inputs().collect();
    nodes.extend([gate.spec.output.as_str(), "clk", GROUND]);
    n.elements
        .push(ElementDecl::instance("XG", &nodes, &gate.name));
    n.directives.push(Directive::Tran {
        step: 0.25e-9,
        stop: clock.period,
        method: Some(IntegrationMethod::BackwardEuler),
    });
    n
}

/// Name of the source driving input node `input` in generated testbenches.
pub fn input_source(input: &str) -> String {
    format!("V{}", input.to_ascii_uppercase())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::Phase;
    use crate::netlist::{flatten, parse_netlist, serialize};

    fn count(g: &GateNetlist, kind: ElementKind) -> usize {
        g.subckt()
            .elements
            .iter()
            .filter(|e| e.kind == kind)
            .count()
    }

    #[test]
    fn majority_has_two_rtds_and_three_transistors() {
        let g = build_mobile_gate(
            &ThresholdGateSpec::majority3("m"),
            &DeviceSet::default(),
            &ClockSpec::default(),
        )
        .unwrap();
        assert_eq!(count(&g, ElementKind::Rtd), 2);
        assert_eq!(count(&g, ElementKind::Mfet), 3);
        assert_eq!(g.ports(), ["a", "b", "c", "m", "clk", "gnd"]);
        assert!(g.window.0 < g.window.1, "{:?}", g.window);
        assert!(g.driver_area < g.load_area);
    }

    #[test]
    fn negative_weights_sit_beside_the_load() {
        let spec = ThresholdGateSpec::new(&[("x", -2), ("y", 1)], 0, Phase::One, "q");
        let g = build_mobile_gate(&spec, &DeviceSet::default(), &ClockSpec::default()).unwrap();
        let sub = g.subckt();
        let neg: Vec<_> = sub
            .elements
            .iter()
            .filter(|e| e.name.starts_with("MN_"))
            .collect();
        assert_eq!(neg.len(), 2);
        assert!(neg.iter().all(|e| e.nodes == ["q", "x", "gnd"]));
        let pos = sub.elements.iter().find(|e| e.name == "MP_y_1").unwrap();
        assert_eq!(pos.nodes, ["clk", "y", "q"]);
    }

    #[test]
    fn overflow_is_reported() {
        let spec = ThresholdGateSpec::new(&[("a", 2), ("b", 2), ("c", 3)], 1, Phase::One, "q");
        let err = build_mobile_gate(&spec, &DeviceSet::default(), &ClockSpec::default());
        assert_eq!(err.unwrap_err(), GateError::WeightOverflow { total: 7 });
    }

    #[test]
    fn testbench_round_trips_and_flattens() {
        let g = build_mobile_gate(
            &ThresholdGateSpec::new(&[("x", -1)], 0, Phase::Two, "y"),
            &DeviceSet::default(),
            &ClockSpec::default(),
        )
        .unwrap();
        let tb = gate_testbench(&g, &ClockSpec::default());
        let text = serialize(&tb);
        let back = parse_netlist(&text).unwrap();
        assert_eq!(back, tb);
        let flat = flatten(&back).unwrap();
        assert!(flat.node_index("XG.clk").is_none());
        assert!(flat.node_index("y").is_some());
    }

    #[test]
    fn identical_specs_serialize_identically() {
        let make = || {
            let g = build_mobile_gate(
                &ThresholdGateSpec::majority3("m"),
                &DeviceSet::default(),
                &ClockSpec::default(),
            )
            .unwrap();
            serialize(&gate_testbench(&g, &ClockSpec::default()))
        };
        assert_eq!(make(), make());
    }
}
