//! Circuit data model and the netlist language.
//!
//! The dialect is a closed SPICE subset:
//!
//! ```text
//! * optional title on the first line
//! R<name> n+ n- value
//! C<name> n+ n- value
//! V<name> n+ n- [DC] value | PULSE(v0 v1 delay rise fall width period)
//! D<name> anode cathode model [AREA=x]        rectifying diode
//! T<name> n+ n- model [AREA=x]                resonant tunneling diode
//! M<name> drain gate source model             molecular transistor
//! X<name> nodes... subckt
//! .model name diode|rtd|mfet(PARAM=value ...)
//! .subckt name ports... / .ends
//! .tran step stop [be|trap]
//! .dc source start stop step
//! .end
//! ```
//!
//! Keywords, element letters and model/subcircuit names are case-insensitive;
//! node names are case-sensitive. Node `0` is ground everywhere.

mod flatten;
mod parse;
mod serialize;
pub mod units;

use std::collections::BTreeMap;

use crate::devices::InvalidParams;
use crate::solver::IntegrationMethod;

pub use flatten::{flatten, Device, Element, FlatCircuit, MAX_SUBCKT_DEPTH};
pub use parse::parse_netlist;
pub use serialize::serialize;

pub const GROUND: &str = "0";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementKind {
    Resistor,
    Capacitor,
    VSource,
    Diode,
    Rtd,
    Mfet,
    SubcktInstance,
}

impl ElementKind {
    pub fn from_letter(c: char) -> Option<Self> {
        Some(match c.to_ascii_uppercase() {
            'R' => Self::Resistor,
            'C' => Self::Capacitor,
            'V' => Self::VSource,
            'D' => Self::Diode,
            'T' => Self::Rtd,
            'M' => Self::Mfet,
            'X' => Self::SubcktInstance,
            _ => return None,
        })
    }

    pub fn letter(self) -> char {
        match self {
            Self::Resistor => 'R',
            Self::Capacitor => 'C',
            Self::VSource => 'V',
            Self::Diode => 'D',
            Self::Rtd => 'T',
            Self::Mfet => 'M',
            Self::SubcktInstance => 'X',
        }
    }

    /// Fixed terminal count; `None` for subcircuit instances.
    pub fn arity(self) -> Option<usize> {
        match self {
            Self::Mfet => Some(3),
            Self::SubcktInstance => None,
            _ => Some(2),
        }
    }
}

/// Independent voltage source waveform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceSpec {
    Dc(f64),
    Pulse(Pulse),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    pub v0: f64,
    pub v1: f64,
    pub delay: f64,
    pub rise: f64,
    pub fall: f64,
    pub width: f64,
    pub period: f64,
}

impl Pulse {
    pub fn validate(&self) -> Result<(), String> {
        let vals = [
            self.v0,
            self.v1,
            self.delay,
            self.rise,
            self.fall,
            self.width,
            self.period,
        ];
        if !vals.iter().all(|x| x.is_finite()) {
            return Err("non-finite PULSE parameter".into());
        }
        if self.rise <= 0.0 || self.fall <= 0.0 || self.width <= 0.0 {
            return Err("PULSE rise, fall and width must be > 0".into());
        }
        if self.period < self.rise + self.fall + self.width {
            return Err("PULSE period shorter than rise+width+fall".into());
        }
        if self.delay < 0.0 {
            return Err("PULSE delay must be >= 0".into());
        }
        Ok(())
    }

    pub fn value_at(&self, t: f64) -> f64 {
        if t < self.delay {
            return self.v0;
        }
        let tau = (t - self.delay) % self.period;
        let dv = self.v1 - self.v0;
        if tau < self.rise {
            self.v0 + dv * tau / self.rise
        } else if tau < self.rise + self.width {
            self.v1
        } else if tau < self.rise + self.width + self.fall {
            self.v1 - dv * (tau - self.rise - self.width) / self.fall
        } else {
            self.v0
        }
    }
}

impl SourceSpec {
    pub fn value_at(&self, t: f64) -> f64 {
        match self {
            Self::Dc(v) => *v,
            Self::Pulse(p) => p.value_at(t),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        match self {
            Self::Dc(v) if v.is_finite() => Ok(()),
            Self::Dc(_) => Err("non-finite DC level".into()),
            Self::Pulse(p) => p.validate(),
        }
    }

    /// Shortest rising or falling edge, if the source has any.
    pub fn shortest_edge(&self) -> Option<f64> {
        match self {
            Self::Dc(_) => None,
            Self::Pulse(p) => Some(p.rise.min(p.fall)),
        }
    }
}

/// One element line, before model resolution and hierarchy expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementDecl {
    pub name: String,
    pub kind: ElementKind,
    pub nodes: Vec<String>,
    /// Lower-case parameter names: `value` for R/C, `area` for D/T.
    pub params: BTreeMap<String, f64>,
    /// Model card for D/T/M, subcircuit name for X (both upper-cased).
    pub model_ref: Option<String>,
    pub source: Option<SourceSpec>,
}

impl ElementDecl {
    pub fn resistor(name: &str, a: &str, b: &str, ohms: f64) -> Self {
        Self::valued(name, ElementKind::Resistor, a, b, ohms)
    }

    pub fn capacitor(name: &str, a: &str, b: &str, farads: f64) -> Self {
        Self::valued(name, ElementKind::Capacitor, a, b, farads)
    }

    fn valued(name: &str, kind: ElementKind, a: &str, b: &str, value: f64) -> Self {
        Self {
            name: name.into(),
            kind,
            nodes: vec![a.into(), b.into()],
            params: BTreeMap::from([("value".to_string(), value)]),
            model_ref: None,
            source: None,
        }
    }

    pub fn vsource(name: &str, pos: &str, neg: &str, spec: SourceSpec) -> Self {
        Self {
            name: name.into(),
            kind: ElementKind::VSource,
            nodes: vec![pos.into(), neg.into()],
            params: BTreeMap::new(),
            model_ref: None,
            source: Some(spec),
        }
    }

    /// Diode, RTD or transistor bound to a model card.
    pub fn device(name: &str, kind: ElementKind, nodes: &[&str], model: &str) -> Self {
        Self {
            name: name.into(),
            kind,
            nodes: nodes.iter().map(|s| s.to_string()).collect(),
            params: BTreeMap::new(),
            model_ref: Some(model.to_ascii_uppercase()),
            source: None,
        }
    }

    pub fn with_area(mut self, area: f64) -> Self {
        self.params.insert("area".into(), area);
        self
    }

    pub fn instance(name: &str, nodes: &[&str], subckt: &str) -> Self {
        Self {
            name: name.into(),
            kind: ElementKind::SubcktInstance,
            nodes: nodes.iter().map(|s| s.to_string()).collect(),
            params: BTreeMap::new(),
            model_ref: Some(subckt.to_ascii_uppercase()),
            source: None,
        }
    }

    pub fn value(&self) -> Option<f64> {
        self.params.get("value").copied()
    }

    pub fn area(&self) -> f64 {
        self.params.get("area").copied().unwrap_or(1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubcktDef {
    pub name: String,
    pub ports: Vec<String>,
    pub elements: Vec<ElementDecl>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ModelKind {
    Diode,
    Rtd,
    Mfet,
}

impl ModelKind {
    pub fn keyword(self) -> &'static str {
        match self {
            Self::Diode => "diode",
            Self::Rtd => "rtd",
            Self::Mfet => "mfet",
        }
    }

    /// Recognized parameter names, upper-case.
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            Self::Diode => &["IS", "N", "VT", "GMIN"],
            Self::Rtd => &["IP", "VP", "IV", "VV", "VR2"],
            Self::Mfet => &["K", "VTH", "LAMBDA"],
        }
    }

    pub fn element_kind(self) -> ElementKind {
        match self {
            Self::Diode => ElementKind::Diode,
            Self::Rtd => ElementKind::Rtd,
            Self::Mfet => ElementKind::Mfet,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelCard {
    pub name: String,
    pub kind: ModelKind,
    /// Upper-case parameter names; missing entries take model defaults.
    pub params: BTreeMap<String, f64>,
}

impl ModelCard {
    pub fn diode(name: &str, p: &crate::devices::DiodeParams) -> Self {
        Self::with(
            name,
            ModelKind::Diode,
            &[
                ("IS", p.i_sat),
                ("N", p.n_ideality),
                ("VT", p.v_thermal),
                ("GMIN", p.g_min),
            ],
        )
    }

    pub fn rtd(name: &str, p: &crate::devices::RtdParams) -> Self {
        Self::with(
            name,
            ModelKind::Rtd,
            &[
                ("IP", p.i_peak),
                ("VP", p.v_peak),
                ("IV", p.i_valley),
                ("VV", p.v_valley),
                ("VR2", p.v_rise2),
            ],
        )
    }

    pub fn mfet(name: &str, p: &crate::devices::MfetParams) -> Self {
        Self::with(
            name,
            ModelKind::Mfet,
            &[("K", p.k_trans), ("VTH", p.v_th), ("LAMBDA", p.lambda)],
        )
    }

    fn with(name: &str, kind: ModelKind, vals: &[(&str, f64)]) -> Self {
        Self {
            name: name.to_ascii_uppercase(),
            kind,
            params: vals.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }

    fn get(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }

    pub fn diode_params(&self) -> Result<crate::devices::DiodeParams, InvalidParams> {
        let d = crate::devices::DiodeParams::default();
        let p = crate::devices::DiodeParams {
            i_sat: self.get("IS", d.i_sat),
            n_ideality: self.get("N", d.n_ideality),
            v_thermal: self.get("VT", d.v_thermal),
            g_min: self.get("GMIN", d.g_min),
        };
        p.validate().map(|_| p)
    }

    pub fn rtd_params(&self) -> Result<crate::devices::RtdParams, InvalidParams> {
        let d = crate::devices::RtdParams::default();
        let p = crate::devices::RtdParams {
            i_peak: self.get("IP", d.i_peak),
            v_peak: self.get("VP", d.v_peak),
            i_valley: self.get("IV", d.i_valley),
            v_valley: self.get("VV", d.v_valley),
            v_rise2: self.get("VR2", d.v_rise2),
        };
        p.validate().map(|_| p)
    }

    pub fn mfet_params(&self) -> Result<crate::devices::MfetParams, InvalidParams> {
        let d = crate::devices::MfetParams::default();
        let p = crate::devices::MfetParams {
            k_trans: self.get("K", d.k_trans),
            v_th: self.get("VTH", d.v_th),
            lambda: self.get("LAMBDA", d.lambda),
        };
        p.validate().map(|_| p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Directive {
    Tran {
        step: f64,
        stop: f64,
        method: Option<IntegrationMethod>,
    },
    Dc {
        source: String,
        start: f64,
        stop: f64,
        step: f64,
    },
}

/// A parsed netlist. Subcircuits and models are keyed by upper-case name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Netlist {
    pub title: String,
    pub elements: Vec<ElementDecl>,
    pub subckts: BTreeMap<String, SubcktDef>,
    pub models: BTreeMap<String, ModelCard>,
    pub directives: Vec<Directive>,
}

impl Netlist {
    pub fn new(title: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            ..Default::default()
        }
    }

    pub fn add_model(&mut self, card: ModelCard) {
        self.models.insert(card.name.clone(), card);
    }

    pub fn add_subckt(&mut self, def: SubcktDef) {
        self.subckts.insert(def.name.to_ascii_uppercase(), def);
    }

    pub fn element(&self, name: &str) -> Option<&ElementDecl> {
        self.elements
            .iter()
            .find(|e| e.name.eq_ignore_ascii_case(name))
    }

    pub fn element_mut(&mut self, name: &str) -> Option<&mut ElementDecl> {
        self.elements
            .iter_mut()
            .find(|e| e.name.eq_ignore_ascii_case(name))
    }

    /// Replace the waveform of a top-level voltage source.
    pub fn set_source(&mut self, name: &str, spec: SourceSpec) -> bool {
        match self.element_mut(name) {
            Some(e) if e.kind == ElementKind::VSource => {
                e.source = Some(spec);
                true
            }
            _ => false,
        }
    }

    /// Every element in the netlist, including those inside subcircuits.
    pub fn all_elements(&self) -> impl Iterator<Item = &ElementDecl> {
        self.elements
            .iter()
            .chain(self.subckts.values().flat_map(|s| s.elements.iter()))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NetlistError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("undefined subcircuit `{0}`")]
    UndefinedSubckt(String),
    #[error("subcircuit recursion through `{name}` (depth {depth})")]
    Recursion { name: String, depth: usize },
    #[error("undefined model `{0}`")]
    UndefinedModel(String),
    #[error("element `{element}`: {message}")]
    Invalid { element: String, message: String },
}

impl NetlistError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Self::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn invalid(element: &str, message: impl Into<String>) -> Self {
        Self::Invalid {
            element: element.into(),
            message: message.into(),
        }
    }
}
