//! Oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use molsim::devices::RtdParams;
use molsim::netlist::{
    flatten, parse_netlist, ElementDecl, ElementKind, FlatCircuit, ModelCard, Netlist, SourceSpec,
    GROUND,
};
use molsim::solver::{
    dc_sweep, solve_transient, IntegrationMethod, SolverOptions, TransientOptions,
};

pub fn circuit(text: &str) -> FlatCircuit {
    flatten(&parse_netlist(text).unwrap()).unwrap()
}

/// Root of `f` on `[lo, hi]` by bisection down to width `tol`.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    assert!(f(lo) * f(hi) < 0.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(lo) * f(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// RTD in series with 1 kΩ from a 0.7 V source: three load-line crossings.
pub const RTD_LOAD: &str = "* rtd with series resistor
V1 in 0 DC 0.7
R1 in mid 1k
T1 mid 0 RTDM
.model RTDM rtd IP=1m VP=0.25 IV=0.1m VV=0.5 VR2=0.25
";

pub const RC: f64 = 1e-3;

pub fn rc_step(rise: f64) -> FlatCircuit {
    circuit(&format!(
        "* rc low-pass\nV1 in 0 PULSE(0 1 0 {rise} {rise} 1 3)\nR1 in out 1k\nC1 out 0 1u\n"
    ))
}

/// Exact response of the RC to a 0 to 1 V ramp of length `tr` (= RC here).
pub fn ramp_response(t: f64, tr: f64) -> f64 {
    if t <= tr {
        (t - RC * (1.0 - (-t / RC).exp())) / tr
    } else {
        1.0 - RC / tr * ((tr / RC).exp() - 1.0) * (-t / RC).exp()
    }
}

pub fn max_error(method: IntegrationMethod, n: usize) -> f64 {
    let c = rc_step(RC);
    let opts = TransientOptions::new(3.0 * RC, RC / n as f64, method);
    let w = solve_transient(&c, &opts, &SolverOptions::default(), &["out"]).unwrap();
    w.times
        .iter()
        .zip(w.trace("out").unwrap())
        .map(|(&t, &v)| (v - ramp_response(t, RC)).abs())
        .fold(0.0, f64::max)
}

/// Slope of log(max error) against log(dt) over three decades of step.
pub fn fitted_order(method: IntegrationMethod) -> f64 {
    let ns = [10usize, 32, 100, 316, 1000, 3162, 10000];
    let pts: Vec<(f64, f64)> = ns
        .iter()
        .map(|&n| ((1.0 / n as f64).ln(), max_error(method, n).ln()))
        .collect();
    let k = pts.len() as f64;
    let (mx, my) = (
        pts.iter().map(|p| p.0).sum::<f64>() / k,
        pts.iter().map(|p| p.1).sum::<f64>() / k,
    );
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Voltage and current of a lone RTD swept from 0 to 1 V.
pub fn rtd_sweep(p: &RtdParams, step: f64) -> (Vec<f64>, Vec<f64>) {
    let mut n = Netlist::new("rtd");
    n.add_model(ModelCard::rtd("RT", p));
    n.elements = vec![
        ElementDecl::vsource("V1", "a", GROUND, SourceSpec::Dc(0.0)),
        ElementDecl::device("T1", ElementKind::Rtd, &["a", GROUND], "RT"),
    ];
    let c = flatten(&n).unwrap();
    let pts = dc_sweep(&c, "V1", 0.0, 1.0, step, &SolverOptions::default()).unwrap();
    pts.iter()
        .map(|s| (s.value, s.op.source_current("V1").unwrap()))
        .unzip()
}
