use std::fmt::Write;

use super::dc::{solve_dc, OperatingPoint};
use super::{SolverError, SolverOptions};
use crate::netlist::{Device, FlatCircuit, SourceSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub op: OperatingPoint,
}

/// Sweep a DC source from `start` to `stop` (either direction) in steps of
/// `|step|`, warm-starting every point from the previous solution so the
/// trace stays on one branch of a multi-valued characteristic.
pub fn dc_sweep(
    circuit: &FlatCircuit,
    source: &str,
    start: f64,
    stop: f64,
    step: f64,
    opts: &SolverOptions,
) -> Result<Vec<SweepPoint>, SolverError> {
    let found = circuit
        .elements()
        .iter()
        .any(|e| e.name.eq_ignore_ascii_case(source) && matches!(e.device, Device::VSource(_)));
    if !found {
        return Err(SolverError::UnknownSource(source.to_string()));
    }
    if !(step.is_finite() && step != 0.0 && start.is_finite() && stop.is_finite()) {
        return Err(SolverError::InvalidOptions(
            "sweep needs a finite non-zero step".into(),
        ));
    }
    let step = step.abs().copysign(stop - start);
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    let mut out: Vec<SweepPoint> = Vec::with_capacity(count);
    for k in 0..count {
        let value = start + k as f64 * step;
        let c = circuit
            .with_source(source, SourceSpec::Dc(value))
            .expect("source checked above");
        let guess = out.last().map(|p| p.op.unknowns());
        let op = solve_dc(&c, opts, guess.as_ref()).map_err(|e| match e {
            SolverError::NoConvergence {
                mut trail,
                residual,
                ..
            } => {
                trail.push(format!("sweep {source}={value:.6e}"));
                SolverError::NoConvergence {
                    trail,
                    residual,
                    time: None,
                }
            }
            other => other,
        })?;
        out.push(SweepPoint { value, op });
    }
    Ok(out)
}

/// CSV with header `v,<node>...,i(<source>)...`; source currents are the
/// current delivered out of the `+` terminal.
pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut s = String::from("v");
    if let Some(first) = points.first() {
        for n in &first.op.node_names()[1..] {
            let _ = write!(s, ",{n}");
        }
        for n in &first.op.source_names {
            let _ = write!(s, ",i({n})");
        }
    }
    s.push('\n');
    for p in points {
        let _ = write!(s, "{:.8e}", p.value + 0.0);
        for v in &p.op.node_voltages[1..] {
            let _ = write!(s, ",{:.8e}", v + 0.0);
        }
        for i in &p.op.branch_currents {
            let _ = write!(s, ",{:.8e}", 0.0 - i);
        }
        s.push('\n');
    }
    s
}
