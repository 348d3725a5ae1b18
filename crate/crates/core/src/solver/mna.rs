use nalgebra::{DMatrix, DVector};

use super::transient::IntegrationMethod;
use super::SolverError;
use crate::devices::{diode_eval, mfet_eval, rtd_eval};
use crate::netlist::{Device, FlatCircuit};

/// Linearized MNA equations at one point.
///
/// Unknowns are the non-ground node voltages (node `k` at index `k - 1`)
/// followed by one branch current per voltage source. A branch current is
/// positive when it flows from the circuit into the source's `+` terminal.
#[derive(Debug, Clone)]
pub struct MnaSystem {
    pub dimension: usize,
    pub jacobian: DMatrix<f64>,
    pub residual: DVector<f64>,
    pub unknowns: DVector<f64>,
}

/// Capacitor history carried between time steps, one entry per capacitor
/// in element order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CapacitorState {
    pub voltage: Vec<f64>,
    pub current: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub enum Integrator<'a> {
    /// Capacitors are open circuits.
    Dc,
    Step {
        h: f64,
        method: IntegrationMethod,
        state: &'a CapacitorState,
    },
}

#[derive(Debug, Clone, Copy)]
pub struct StampContext<'a> {
    pub time: f64,
    /// Conductance from every node to ground.
    pub gmin: f64,
    /// Multiplier on every independent source.
    pub source_scale: f64,
    pub integrator: Integrator<'a>,
}

impl Default for StampContext<'_> {
    fn default() -> Self {
        Self {
            time: 0.0,
            gmin: 0.0,
            source_scale: 1.0,
            integrator: Integrator::Dc,
        }
    }
}

pub(crate) fn dimension(c: &FlatCircuit) -> usize {
    c.node_count() - 1 + c.source_names().len()
}

/// Nodes with no conductive path to ground. Capacitors conduct only when
/// `through_capacitors` is set (companion models during a time step).
pub(crate) fn floating_nodes(c: &FlatCircuit, through_capacitors: bool) -> Vec<usize> {
    let n = c.node_count();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let join = |p: &mut Vec<usize>, a: usize, b: usize| {
        let (ra, rb) = (find(p, a), find(p, b));
        if ra != rb {
            p[ra] = rb;
        }
    };
    for e in c.elements() {
        match e.device {
            Device::Capacitor(_) if !through_capacitors => {}
            // gate is insulated
            Device::Mfet(_) => join(&mut parent, e.nodes[0], e.nodes[2]),
            _ => join(&mut parent, e.nodes[0], e.nodes[1]),
        }
    }
    let ground = find(&mut parent, 0);
    (1..n).filter(|&i| find(&mut parent, i) != ground).collect()
}

struct Builder {
    j: DMatrix<f64>,
    f: DVector<f64>,
}

impl Builder {
    /// Row/column of a node, `None` for ground.
    fn idx(node: usize) -> Option<usize> {
        node.checked_sub(1)
    }

    fn add_f(&mut self, node: usize, v: f64) {
        if let Some(r) = Self::idx(node) {
            self.f[r] += v;
        }
    }

    fn add_j(&mut self, row: usize, col: usize, v: f64) {
        if let (Some(r), Some(c)) = (Self::idx(row), Self::idx(col)) {
            self.j[(r, c)] += v;
        }
    }

    /// Two-terminal branch carrying `i` from `a` to `b` with conductance `g`.
    fn branch(&mut self, a: usize, b: usize, i: f64, g: f64) {
        self.add_f(a, i);
        self.add_f(b, -i);
        self.add_j(a, a, g);
        self.add_j(a, b, -g);
        self.add_j(b, a, -g);
        self.add_j(b, b, g);
    }
}

/// Assemble residual and Jacobian of the circuit equations at `unknowns`.
///
/// The residual row of a node is the sum of currents leaving it through
/// elements; the row of a voltage source is `v+ - v- - V(t)`.
pub fn stamp(
    circuit: &FlatCircuit,
    unknowns: &DVector<f64>,
    ctx: &StampContext,
) -> Result<MnaSystem, SolverError> {
    let dim = dimension(circuit);
    if unknowns.len() != dim {
        return Err(SolverError::DimensionMismatch {
            expected: dim,
            got: unknowns.len(),
        });
    }
    if ctx.gmin <= 0.0 {
        let floating = floating_nodes(circuit, matches!(ctx.integrator, Integrator::Step { .. }));
        if !floating.is_empty() {
            return Err(SolverError::SingularTopology {
                nodes: floating
                    .iter()
                    .map(|&i| circuit.node_names()[i].clone())
                    .collect(),
            });
        }
    }
    let n_nodes = circuit.node_count();
    let volt = |node: usize| if node == 0 { 0.0 } else { unknowns[node - 1] };
    let mut b = Builder {
        j: DMatrix::zeros(dim, dim),
        f: DVector::zeros(dim),
    };
    let mut branch_row = n_nodes - 1;
    let mut cap = 0usize;
    for e in circuit.elements() {
        let nd = &e.nodes;
        match &e.device {
            Device::Resistor(r) => {
                let g = 1.0 / r;
                let v = volt(nd[0]) - volt(nd[1]);
                b.branch(nd[0], nd[1], g * v, g);
            }
            Device::Capacitor(c) => {
                let v = volt(nd[0]) - volt(nd[1]);
                if let Integrator::Step { h, method, state } = ctx.integrator {
                    let (i, g) = match method {
                        IntegrationMethod::BackwardEuler => {
                            let g = c / h;
                            (g * (v - state.voltage[cap]), g)
                        }
                        IntegrationMethod::Trapezoidal => {
                            let g = 2.0 * c / h;
                            (g * (v - state.voltage[cap]) - state.current[cap], g)
                        }
                    };
                    b.branch(nd[0], nd[1], i, g);
                }
                cap += 1;
            }
            Device::VSource(spec) => {
                let (p, m) = (nd[0], nd[1]);
                let current = unknowns[branch_row];
                b.add_f(p, current);
                b.add_f(m, -current);
                if let Some(r) = Builder::idx(p) {
                    b.j[(r, branch_row)] += 1.0;
                    b.j[(branch_row, r)] += 1.0;
                }
                if let Some(r) = Builder::idx(m) {
                    b.j[(r, branch_row)] -= 1.0;
                    b.j[(branch_row, r)] -= 1.0;
                }
                b.f[branch_row] = volt(p) - volt(m) - ctx.source_scale * spec.value_at(ctx.time);
                branch_row += 1;
            }
            Device::Diode(p) => {
                let ev = diode_eval(volt(nd[0]) - volt(nd[1]), p);
                b.branch(nd[0], nd[1], ev.current, ev.d_current_d_v);
            }
            Device::Rtd(p) => {
                let ev = rtd_eval(volt(nd[0]) - volt(nd[1]), p);
                b.branch(nd[0], nd[1], ev.current, ev.d_current_d_v);
            }
            Device::Mfet(p) => {
                let (d, g, s) = (nd[0], nd[1], nd[2]);
                let vs = volt(s);
                let ev = mfet_eval(volt(g) - vs, volt(d) - vs, p);
                b.add_f(d, ev.current);
                b.add_f(s, -ev.current);
                // d i / d(vd, vg, vs) = (gds, gm, -gm - gds)
                let partials = [(d, ev.gds), (g, ev.gm), (s, -ev.gm - ev.gds)];
                for (col, val) in partials {
                    b.add_j(d, col, val);
                    b.add_j(s, col, -val);
                }
            }
        }
    }
    if ctx.gmin > 0.0 {
        for node in 1..n_nodes {
            b.branch(node, 0, ctx.gmin * volt(node), ctx.gmin);
        }
    }
    Ok(MnaSystem {
        dimension: dim,
        jacobian: b.j,
        residual: b.f,
        unknowns: unknowns.clone(),
    })
}
