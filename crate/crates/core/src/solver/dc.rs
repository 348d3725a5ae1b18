use nalgebra::DVector;

use super::mna::{dimension, floating_nodes, stamp, MnaSystem, StampContext};
use super::{SolverError, SolverOptions};
use crate::netlist::{Device, FlatCircuit};

/// Which homotopy produced an operating point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Newton,
    GminStepping,
    SourceStepping,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatingPoint {
    node_names: Vec<String>,
    /// Indexed by node; entry 0 is ground.
    pub node_voltages: Vec<f64>,
    /// Current into each source's `+` terminal, in source order.
    pub branch_currents: Vec<f64>,
    pub source_names: Vec<String>,
    pub converged: bool,
    /// Newton iterations spent by the final strategy.
    pub iterations: usize,
    pub strategy: Strategy,
    pub residual_norm: f64,
}

impl OperatingPoint {
    pub fn voltage(&self, node: &str) -> Option<f64> {
        self.node_names
            .iter()
            .position(|n| n == node)
            .map(|i| self.node_voltages[i])
    }

    /// Current delivered by a source out of its `+` terminal.
    pub fn source_current(&self, source: &str) -> Option<f64> {
        self.source_names
            .iter()
            .position(|n| n.eq_ignore_ascii_case(source))
            .map(|i| -self.branch_currents[i])
    }

    pub fn node_names(&self) -> &[String] {
        &self.node_names
    }

    /// Solution vector in MNA unknown order.
    pub fn unknowns(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.node_voltages.len() - 1 + self.branch_currents.len(),
            self.node_voltages[1..]
                .iter()
                .chain(&self.branch_currents)
                .copied(),
        )
    }

    pub(crate) fn from_unknowns(
        circuit: &FlatCircuit,
        x: &DVector<f64>,
        iterations: usize,
        strategy: Strategy,
        residual_norm: f64,
    ) -> Self {
        let n = circuit.node_count();
        let mut node_voltages = vec![0.0];
        node_voltages.extend(x.iter().take(n - 1));
        Self {
            node_names: circuit.node_names().to_vec(),
            node_voltages,
            branch_currents: x.iter().skip(n - 1).copied().collect(),
            source_names: circuit
                .source_names()
                .iter()
                .map(|s| s.to_string())
                .collect(),
            converged: true,
            iterations,
            strategy,
            residual_norm,
        }
    }
}

pub(crate) struct NewtonOutcome {
    pub x: DVector<f64>,
    pub iterations: usize,
    pub residual_norm: f64,
}

pub(crate) struct NewtonFailure {
    pub residual_norm: f64,
}

/// Unknown indices whose per-iteration change is clamped.
pub(crate) fn damped_unknowns(circuit: &FlatCircuit) -> Vec<usize> {
    let mut v: Vec<usize> = circuit
        .elements()
        .iter()
        .filter(|e| e.device.is_nonlinear())
        .flat_map(|e| e.nodes.iter().copied())
        .filter(|&n| n != 0)
        .map(|n| n - 1)
        .collect();
    v.sort_unstable();
    v.dedup();
    v
}

fn tolerance(opts: &SolverOptions, x: &DVector<f64>) -> f64 {
    opts.abstol + opts.reltol * x.amax()
}

/// Damped Newton iteration on the system defined by `ctx`.
pub(crate) fn newton(
    circuit: &FlatCircuit,
    x0: DVector<f64>,
    ctx: &StampContext,
    opts: &SolverOptions,
    damped: &[usize],
) -> Result<NewtonOutcome, NewtonFailure> {
    let linear = circuit.is_linear();
    let mut x = x0;
    let fail = |r: f64| NewtonFailure { residual_norm: r };
    let mut sys: MnaSystem = stamp(circuit, &x, ctx).map_err(|_| fail(f64::INFINITY))?;
    for it in 1..=opts.itl_newton {
        let rhs = -&sys.residual;
        let Some(dx) = sys.jacobian.lu().solve(&rhs) else {
            return Err(fail(sys.residual.amax()));
        };
        let step_norm = dx.amax();
        let mut dx = dx;
        let mut clamped = false;
        for &i in damped {
            if dx[i].abs() > opts.damping {
                dx[i] = opts.damping.copysign(dx[i]);
                clamped = true;
            }
        }
        x += &dx;
        if !x.iter().all(|v| v.is_finite()) {
            return Err(fail(f64::INFINITY));
        }
        sys = stamp(circuit, &x, ctx).map_err(|_| fail(f64::INFINITY))?;
        let res = sys.residual.amax();
        let tol = tolerance(opts, &x);
        if res <= tol && !clamped && (linear || step_norm <= tol) {
            return Ok(NewtonOutcome {
                x,
                iterations: it,
                residual_norm: res,
            });
        }
    }
    Err(fail(sys.residual.amax()))
}

/// Damped Newton, then gmin stepping, then source stepping.
///
/// With several solutions (NDR circuits) the result is whichever root the
/// first successful strategy reaches; pass `initial_guess` to pick a branch.
pub fn solve_dc(
    circuit: &FlatCircuit,
    opts: &SolverOptions,
    initial_guess: Option<&DVector<f64>>,
) -> Result<OperatingPoint, SolverError> {
    solve_dc_at(circuit, opts, initial_guess, 0.0)
}

pub(crate) fn solve_dc_at(
    circuit: &FlatCircuit,
    opts: &SolverOptions,
    initial_guess: Option<&DVector<f64>>,
    time: f64,
) -> Result<OperatingPoint, SolverError> {
    opts.validate()?;
    let dim = dimension(circuit);
    let floating = floating_nodes(circuit, false);
    if !floating.is_empty() {
        return Err(SolverError::SingularTopology {
            nodes: floating
                .iter()
                .map(|&i| circuit.node_names()[i].clone())
                .collect(),
        });
    }
    let x0 = match initial_guess {
        Some(g) if g.len() == dim => g.clone(),
        Some(g) => {
            return Err(SolverError::DimensionMismatch {
                expected: dim,
                got: g.len(),
            })
        }
        None => DVector::zeros(dim),
    };
    let damped = damped_unknowns(circuit);
    let base = StampContext {
        time,
        ..Default::default()
    };
    let mut trail = Vec::new();

    match newton(circuit, x0.clone(), &base, opts, &damped) {
        Ok(o) => {
            return Ok(OperatingPoint::from_unknowns(
                circuit,
                &o.x,
                o.iterations,
                Strategy::Newton,
                o.residual_norm,
            ))
        }
        Err(e) => trail.push(format!("newton (residual {:.3e})", e.residual_norm)),
    }

    // gmin stepping
    let mut x = x0.clone();
    let mut gmin_ok = true;
    for &g in &opts.gmin_schedule {
        let ctx = StampContext { gmin: g, ..base };
        match newton(circuit, x.clone(), &ctx, opts, &damped) {
            Ok(o) => x = o.x,
            Err(e) => {
                trail.push(format!("gmin {g:.0e} (residual {:.3e})", e.residual_norm));
                gmin_ok = false;
                break;
            }
        }
    }
    if gmin_ok {
        match newton(circuit, x, &base, opts, &damped) {
            Ok(o) => {
                return Ok(OperatingPoint::from_unknowns(
                    circuit,
                    &o.x,
                    o.iterations,
                    Strategy::GminStepping,
                    o.residual_norm,
                ))
            }
            Err(e) => trail.push(format!("gmin final (residual {:.3e})", e.residual_norm)),
        }
    }

    // source stepping with step halving on failure
    let mut x = DVector::zeros(dim);
    let mut scale = 0.0;
    let mut inc = 1.0 / opts.source_steps as f64;
    let min_inc = inc / 1024.0;
    let mut last_residual = f64::INFINITY;
    let mut iterations = 0;
    while scale < 1.0 {
        let target = (scale + inc).min(1.0);
        let ctx = StampContext {
            source_scale: target,
            ..base
        };
        match newton(circuit, x.clone(), &ctx, opts, &damped) {
            Ok(o) => {
                x = o.x;
                scale = target;
                iterations = o.iterations;
                last_residual = o.residual_norm;
                inc = (inc * 2.0).min(1.0 / opts.source_steps as f64);
            }
            Err(e) => {
                last_residual = e.residual_norm;
                inc *= 0.5;
                if inc < min_inc {
                    trail.push(format!(
                        "source stepping stalled at scale {scale:.4} (residual {:.3e})",
                        e.residual_norm
                    ));
                    return Err(SolverError::NoConvergence {
                        trail,
                        residual: last_residual,
                        time: None,
                    });
                }
            }
        }
    }
    Ok(OperatingPoint::from_unknowns(
        circuit,
        &x,
        iterations,
        Strategy::SourceStepping,
        last_residual,
    ))
}

/// Largest KCL imbalance over all nodes, recomputed element by element.
pub fn kcl_residual(circuit: &FlatCircuit, op: &OperatingPoint) -> f64 {
    use crate::devices::{diode_eval, mfet_eval, rtd_eval};
    let v = &op.node_voltages;
    let mut sum = vec![0.0; circuit.node_count()];
    let mut src = 0;
    for e in circuit.elements() {
        let n = &e.nodes;
        let mut flow = |a: usize, b: usize, i: f64| {
            sum[a] += i;
            sum[b] -= i;
        };
        match &e.device {
            Device::Resistor(r) => flow(n[0], n[1], (v[n[0]] - v[n[1]]) / r),
            Device::Capacitor(_) => {}
            Device::VSource(_) => {
                flow(n[0], n[1], op.branch_currents[src]);
                src += 1;
            }
            Device::Diode(p) => flow(n[0], n[1], diode_eval(v[n[0]] - v[n[1]], p).current),
            Device::Rtd(p) => flow(n[0], n[1], rtd_eval(v[n[0]] - v[n[1]], p).current),
            Device::Mfet(p) => {
                let i = mfet_eval(v[n[1]] - v[n[2]], v[n[0]] - v[n[2]], p).current;
                flow(n[0], n[2], i);
            }
        }
    }
    sum[1..].iter().fold(0.0, |m, x| m.max(x.abs()))
}
