use std::fmt::Write;

use nalgebra::DVector;

use super::dc::{damped_unknowns, newton, solve_dc_at};
use super::mna::{CapacitorState, Integrator, StampContext};
use super::{SolverError, SolverOptions};
use crate::netlist::{Device, FlatCircuit};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegrationMethod {
    BackwardEuler,
    Trapezoidal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransientOptions {
    pub t_stop: f64,
    pub dt: f64,
    pub method: IntegrationMethod,
    /// Largest change of a node touching a nonlinear device allowed within
    /// one internal step; larger moves are resolved by halving the step.
    pub dv_max: f64,
}

impl TransientOptions {
    pub fn new(t_stop: f64, dt: f64, method: IntegrationMethod) -> Self {
        TransientOptions {
            t_stop,
            dt,
            method,
            dv_max: 0.05,
        }
    }

    fn validate(&self) -> Result<(), SolverError> {
        if !(self.dt > 0.0 && self.dt <= self.t_stop && self.t_stop.is_finite()) {
            return Err(SolverError::InvalidOptions("need 0 < dt <= t_stop".into()));
        }
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(self.dv_max > 0.0) {
            return Err(SolverError::InvalidOptions(
                "dv_max must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Sampled node voltages on the fixed time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub times: Vec<f64>,
    pub names: Vec<String>,
    /// One trace per probed node, each as long as `times`.
    pub values: Vec<Vec<f64>>,
    /// Non-fatal diagnostics, e.g. source edges sampled by too few steps.
    pub warnings: Vec<String>,
}

impl Waveform {
    pub fn trace(&self, node: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == node)
            .map(|i| self.values[i].as_slice())
    }

    /// Linearly interpolated voltage of `node` at time `t`.
    pub fn value_at(&self, node: &str, t: f64) -> Option<f64> {
        let tr = self.trace(node)?;
        let k = self.times.partition_point(|&x| x <= t);
        if k == 0 {
            return tr.first().copied();
        }
        if k >= self.times.len() {
            return tr.last().copied();
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let w = (t - t0) / (t1 - t0);
        Some(tr[k - 1] + w * (tr[k] - tr[k - 1]))
    }

    /// CSV with header `t,<node>...`, 9 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t");
        for n in &self.names {
            let _ = write!(s, ",{n}");
        }
        s.push('\n');
        for (k, t) in self.times.iter().enumerate() {
            let _ = write!(s, "{:.8e}", t + 0.0);
            for tr in &self.values {
                let _ = write!(s, ",{:.8e}", tr[k] + 0.0);
            }
            s.push('\n');
        }
        s
    }
}

fn capacitor_voltages(circuit: &FlatCircuit, x: &DVector<f64>) -> Vec<f64> {
    let volt = |n: usize| if n == 0 { 0.0 } else { x[n - 1] };
    circuit
        .elements()
        .iter()
        .filter(|e| matches!(e.device, Device::Capacitor(_)))
        .map(|e| volt(e.nodes[0]) - volt(e.nodes[1]))
        .collect()
}

fn capacitances(circuit: &FlatCircuit) -> Vec<f64> {
    circuit
        .elements()
        .iter()
        .filter_map(|e| match e.device {
            Device::Capacitor(c) => Some(c),
            _ => None,
        })
        .collect()
}

struct Stepper<'a> {
    circuit: &'a FlatCircuit,
    opts: &'a SolverOptions,
    damped: Vec<usize>,
    caps: Vec<f64>,
    dv_max: f64,
}

impl Stepper<'_> {
    /// Advance from `t` by `h`, returning the new solution and capacitor state.
    fn step(
        &self,
        x: &DVector<f64>,
        state: &CapacitorState,
        t: f64,
        h: f64,
        method: IntegrationMethod,
    ) -> Option<(DVector<f64>, CapacitorState)> {
        let ctx = StampContext {
            time: t + h,
            gmin: 0.0,
            source_scale: 1.0,
            integrator: Integrator::Step { h, method, state },
        };
        let out = newton(self.circuit, x.clone(), &ctx, self.opts, &self.damped).ok()?;
        let voltage = capacitor_voltages(self.circuit, &out.x);
        let current = voltage
            .iter()
            .enumerate()
            .map(|(k, v)| {
                let dv = v - state.voltage[k];
                match method {
                    IntegrationMethod::BackwardEuler => self.caps[k] / h * dv,
                    IntegrationMethod::Trapezoidal => {
                        2.0 * self.caps[k] / h * dv - state.current[k]
                    }
                }
            })
            .collect();
        Some((out.x, CapacitorState { voltage, current }))
    }

    /// One output step. The step is halved recursively when Newton fails or
    /// a nonlinear node moves more than `dv_max`, so that fast switching
    /// events follow the circuit's own dynamics instead of jumping to an
    /// arbitrary equilibrium.
    fn advance(
        &self,
        x: &DVector<f64>,
        state: &CapacitorState,
        t: f64,
        h: f64,
        method: IntegrationMethod,
        depth: u32,
    ) -> Option<(DVector<f64>, CapacitorState)> {
        let attempt = self.step(x, state, t, h, method);
        let accept = match &attempt {
            Some((nx, _)) => {
                depth >= MAX_HALVINGS
                    || self
                        .damped
                        .iter()
                        .all(|&i| (nx[i] - x[i]).abs() <= self.dv_max)
            }
            None => false,
        };
        if accept {
            return attempt;
        }
        if depth >= MAX_HALVINGS {
            return None;
        }
        let half = h / 2.0;
        let be = IntegrationMethod::BackwardEuler;
        let (mx, ms) = self.advance(x, state, t, half, be, depth + 1)?;
        self.advance(&mx, &ms, t + half, half, be, depth + 1)
    }
}

const MAX_HALVINGS: u32 = 12;

/// Fixed-step transient analysis starting from the DC operating point at
/// `t = 0`. Trapezoidal integration takes its first step with backward Euler.
/// An empty `probes` list records every non-ground node.
pub fn solve_transient(
    circuit: &FlatCircuit,
    t_opts: &TransientOptions,
    s_opts: &SolverOptions,
    probes: &[&str],
) -> Result<Waveform, SolverError> {
    t_opts.validate()?;
    let probe_idx: Vec<(String, usize)> = if probes.is_empty() {
        circuit.node_names()[1..]
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i + 1))
            .collect()
    } else {
        probes
            .iter()
            .map(|p| {
                circuit
                    .node_index(p)
                    .map(|i| (p.to_string(), i))
                    .ok_or_else(|| SolverError::UnknownNode(p.to_string()))
            })
            .collect::<Result<_, _>>()?
    };

    let mut warnings = Vec::new();
    for e in circuit.elements() {
        if let Device::VSource(s) = &e.device {
            if let Some(edge) = s.shortest_edge() {
                if edge < 4.0 * t_opts.dt {
                    warnings.push(format!(
                        "step too large: {} has a {edge:.3e} s edge, below 4*dt = {:.3e} s",
                        e.name,
                        4.0 * t_opts.dt
                    ));
                }
            }
        }
    }

    let op = solve_dc_at(circuit, s_opts, None, 0.0).map_err(|e| match e {
        SolverError::NoConvergence {
            trail, residual, ..
        } => SolverError::NoConvergence {
            trail,
            residual,
            time: Some(0.0),
        },
        other => other,
    })?;
    let mut x = op.unknowns();
    let caps = capacitances(circuit);
    let mut state = CapacitorState {
        voltage: capacitor_voltages(circuit, &x),
        current: vec![0.0; caps.len()],
    };
    let stepper = Stepper {
        circuit,
        opts: s_opts,
        damped: damped_unknowns(circuit),
        caps,
        dv_max: t_opts.dv_max,
    };

    let steps = (t_opts.t_stop / t_opts.dt - 1e-9).ceil() as usize;
    let volt = |x: &DVector<f64>, n: usize| if n == 0 { 0.0 } else { x[n - 1] };
    let mut times = Vec::with_capacity(steps + 1);
    let mut values: Vec<Vec<f64>> = vec![Vec::with_capacity(steps + 1); probe_idx.len()];
    let record = |times: &mut Vec<f64>, values: &mut Vec<Vec<f64>>, t: f64, x: &DVector<f64>| {
        times.push(t);
        for (k, (_, n)) in probe_idx.iter().enumerate() {
            values[k].push(volt(x, *n));
        }
    };
    record(&mut times, &mut values, 0.0, &x);
    for k in 0..steps {
        let t = k as f64 * t_opts.dt;
        let h = t_opts.dt.min(t_opts.t_stop - t);
        let method = if k == 0 {
            IntegrationMethod::BackwardEuler
        } else {
            t_opts.method
        };
        let (nx, ns) = stepper
            .advance(&x, &state, t, h, method, 0)
            .ok_or_else(|| SolverError::NoConvergence {
                trail: vec!["transient newton".into(), "step subdivision".into()],
                residual: f64::NAN,
                time: Some(t + h),
            })?;
        x = nx;
        state = ns;
        record(&mut times, &mut values, t + h, &x);
    }
    Ok(Waveform {
        times,
        names: probe_idx.into_iter().map(|(n, _)| n).collect(),
        values,
        warnings,
    })
}
