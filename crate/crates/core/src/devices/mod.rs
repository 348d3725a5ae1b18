//! Quasi-static terminal models for the three molecular device classes.
//!
//! Every model returns its current together with the exact derivative of the
//! implemented expression, so Newton iterations see a consistent Jacobian.

mod diode;
mod mfet;
mod rtd;

pub use diode::{diode_eval, DiodeParams};
pub use mfet::{mfet_eval, MfetEval, MfetParams};
pub use rtd::{rtd_eval, RtdParams};

/// Current through a two-terminal device and its small-signal conductance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceEval {
    pub current: f64,
    pub d_current_d_v: f64,
}

/// Parameter set rejected by a model's invariants.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid {model} parameters: {reason}")]
pub struct InvalidParams {
    pub model: &'static str,
    pub reason: String,
}

impl InvalidParams {
    pub(crate) fn new(model: &'static str, reason: impl Into<String>) -> Self {
        Self {
            model,
            reason: reason.into(),
        }
    }
}
