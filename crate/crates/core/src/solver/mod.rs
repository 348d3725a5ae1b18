//! Modified nodal analysis: stamping, Newton DC operating point with
//! continuation fallbacks, DC sweeps and fixed-step transient integration.

mod dc;
mod mna;
mod sweep;
mod transient;

pub use dc::{kcl_residual, solve_dc, OperatingPoint, Strategy};
pub use mna::{stamp, CapacitorState, Integrator, MnaSystem, StampContext};
pub use sweep::{dc_sweep, sweep_csv, SweepPoint};
pub use transient::{solve_transient, IntegrationMethod, TransientOptions, Waveform};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Absolute tolerance on residual and Newton step.
    pub abstol: f64,
    pub reltol: f64,
    /// Newton iteration limit per solve.
    pub itl_newton: usize,
    /// Largest per-iteration change of a node touching a nonlinear device, volts.
    pub damping: f64,
    /// Strictly decreasing shunt conductances tried when plain Newton fails.
    pub gmin_schedule: Vec<f64>,
    pub source_steps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            abstol: 1e-9,
            reltol: 1e-6,
            itl_newton: 100,
            damping: 0.5,
            gmin_schedule: (3..=12).map(|k| 10f64.powi(-k)).collect(),
            source_steps: 10,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: &str| Err(SolverError::InvalidOptions(m.to_string()));
        if !(self.abstol > 0.0 && self.reltol > 0.0 && self.damping > 0.0) {
            return bad("tolerances and damping must be positive");
        }
        if self.itl_newton == 0 || self.source_steps == 0 {
            return bad("iteration and step counts must be positive");
        }
        if self.gmin_schedule.iter().any(|g| *g <= 0.0)
            || self.gmin_schedule.windows(2).any(|w| w[1] >= w[0])
        {
            return bad("gmin schedule must be positive and strictly decreasing");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("no DC path to ground from node(s) {}", .nodes.join(", "))]
    SingularTopology { nodes: Vec<String> },
    #[error("singular MNA matrix")]
    SingularMatrix,
    #[error("no convergence{} after {}; final residual {residual:.3e}", .time.map(|t| format!(" at t={t:.6e}")).unwrap_or_default(), .trail.join(" -> "))]
    NoConvergence {
        trail: Vec<String>,
        residual: f64,
        time: Option<f64>,
    },
    #[error("unknown voltage source `{0}`")]
    UnknownSource(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("unknowns vector has length {got}, circuit needs {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid options: {0}")]
    InvalidOptions(String),
}
