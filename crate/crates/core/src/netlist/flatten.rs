use std::collections::HashMap;

use super::parse::check_references;
use super::{ElementDecl, ElementKind, ModelCard, Netlist, NetlistError, SourceSpec, GROUND};
use crate::devices::{DiodeParams, MfetParams, RtdParams};

/// Deepest allowed chain of nested subcircuit instances.
pub const MAX_SUBCKT_DEPTH: usize = 32;

/// A resolved element: device parameters with area factors applied.
#[derive(Debug, Clone, PartialEq)]
pub enum Device {
    Resistor(f64),
    Capacitor(f64),
    VSource(SourceSpec),
    Diode(DiodeParams),
    Rtd(RtdParams),
    /// Terminals are ordered drain, gate, source.
    Mfet(MfetParams),
}

impl Device {
    pub fn kind(&self) -> ElementKind {
        match self {
            Device::Resistor(_) => ElementKind::Resistor,
            Device::Capacitor(_) => ElementKind::Capacitor,
            Device::VSource(_) => ElementKind::VSource,
            Device::Diode(_) => ElementKind::Diode,
            Device::Rtd(_) => ElementKind::Rtd,
            Device::Mfet(_) => ElementKind::Mfet,
        }
    }

    pub fn is_nonlinear(&self) -> bool {
        matches!(self, Device::Diode(_) | Device::Rtd(_) | Device::Mfet(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    /// Hierarchical name, e.g. `XFA.XCARRY.T1`.
    pub name: String,
    pub device: Device,
    pub nodes: Vec<usize>,
}

/// Elaborated circuit: node 0 is ground, every other node is touched by at
/// least one element.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatCircuit {
    nodes: Vec<String>,
    elements: Vec<Element>,
}

impl FlatCircuit {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_names(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn element(&self, name: &str) -> Option<&Element> {
        self.elements
            .iter()
            .find(|e| e.name.eq_ignore_ascii_case(name))
    }

    pub fn is_linear(&self) -> bool {
        !self.elements.iter().any(|e| e.device.is_nonlinear())
    }

    /// Names of independent voltage sources, in branch-unknown order.
    pub fn source_names(&self) -> Vec<&str> {
        self.elements
            .iter()
            .filter(|e| matches!(e.device, Device::VSource(_)))
            .map(|e| e.name.as_str())
            .collect()
    }

    /// Copy with one voltage source's waveform replaced.
    pub fn with_source(&self, name: &str, spec: SourceSpec) -> Option<FlatCircuit> {
        let mut out = self.clone();
        let e = out.elements.iter_mut().find(|e| {
            e.name.eq_ignore_ascii_case(name) && matches!(e.device, Device::VSource(_))
        })?;
        e.device = Device::VSource(spec);
        Some(out)
    }

    /// Express the flat circuit as a hierarchy-free netlist, one model card
    /// per distinct parameter set.
    pub fn to_netlist(&self, title: &str) -> Netlist {
        let mut net = Netlist::new(title);
        let mut cards: Vec<ModelCard> = Vec::new();
        let mut model_for = |card: ModelCard| -> String {
            if let Some(c) = cards
                .iter()
                .find(|c| c.kind == card.kind && c.params == card.params)
            {
                return c.name.clone();
            }
            let name = format!("{}{}", card.name, cards.len());
            cards.push(ModelCard {
                name: name.clone(),
                ..card
            });
            name
        };
        for e in &self.elements {
            let kind = e.device.kind();
            let mut name = e.name.clone();
            if name.chars().next().and_then(ElementKind::from_letter) != Some(kind) {
                name = format!("{}_{}", kind.letter(), name);
            }
            let nodes: Vec<&str> = e.nodes.iter().map(|&i| self.nodes[i].as_str()).collect();
            let decl = match &e.device {
                Device::Resistor(r) => ElementDecl::resistor(&name, nodes[0], nodes[1], *r),
                Device::Capacitor(c) => ElementDecl::capacitor(&name, nodes[0], nodes[1], *c),
                Device::VSource(s) => ElementDecl::vsource(&name, nodes[0], nodes[1], *s),
                Device::Diode(p) => {
                    let m = model_for(ModelCard::diode("FD", p));
                    ElementDecl::device(&name, kind, &nodes, &m)
                }
                Device::Rtd(p) => {
                    let m = model_for(ModelCard::rtd("FT", p));
                    ElementDecl::device(&name, kind, &nodes, &m)
                }
                Device::Mfet(p) => {
                    let m = model_for(ModelCard::mfet("FM", p));
                    ElementDecl::device(&name, kind, &nodes, &m)
                }
            };
            net.elements.push(decl);
        }
        for c in cards {
            net.add_model(c);
        }
        net
    }
}

struct Flattener<'a> {
    net: &'a Netlist,
    index: HashMap<String, usize>,
    nodes: Vec<String>,
    elements: Vec<Element>,
    stack: Vec<String>,
}

impl<'a> Flattener<'a> {
    fn node(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.nodes.len();
        self.nodes.push(name.to_string());
        self.index.insert(name.to_string(), i);
        i
    }

    fn resolve(&self, decl: &ElementDecl) -> Result<Device, NetlistError> {
        let bad = |m: String| NetlistError::invalid(&decl.name, m);
        let card = |name: &Option<String>| -> Result<&ModelCard, NetlistError> {
            let name = name.as_deref().unwrap_or("");
            self.net
                .models
                .get(name)
                .ok_or_else(|| NetlistError::UndefinedModel(name.to_string()))
        };
        let area = decl.area();
        if !(area > 0.0 && area.is_finite()) {
            return Err(bad("AREA must be a positive number".into()));
        }
        let positive_value = || match decl.value() {
            Some(v) if v > 0.0 && v.is_finite() => Ok(v),
            _ => Err(bad("value must be a positive number".into())),
        };
        Ok(match decl.kind {
            ElementKind::Resistor => Device::Resistor(positive_value()?),
            ElementKind::Capacitor => Device::Capacitor(positive_value()?),
            ElementKind::VSource => {
                let spec = decl
                    .source
                    .ok_or_else(|| bad("missing source value".into()))?;
                spec.validate().map_err(bad)?;
                Device::VSource(spec)
            }
            ElementKind::Diode => {
                let mut p = card(&decl.model_ref)?
                    .diode_params()
                    .map_err(|e| bad(e.to_string()))?;
                p.i_sat *= area;
                Device::Diode(p)
            }
            ElementKind::Rtd => {
                let p = card(&decl.model_ref)?
                    .rtd_params()
                    .map_err(|e| bad(e.to_string()))?;
                Device::Rtd(p.scaled(area))
            }
            ElementKind::Mfet => Device::Mfet(
                card(&decl.model_ref)?
                    .mfet_params()
                    .map_err(|e| bad(e.to_string()))?,
            ),
            ElementKind::SubcktInstance => unreachable!("instances are expanded"),
        })
    }

    fn expand(
        &mut self,
        elements: &'a [ElementDecl],
        prefix: &str,
        port_map: &HashMap<&str, String>,
    ) -> Result<(), NetlistError> {
        let map_node = |n: &str| -> String {
            if n == GROUND {
                GROUND.to_string()
            } else if let Some(outer) = port_map.get(n) {
                outer.clone()
            } else {
                format!("{prefix}{n}")
            }
        };
        for decl in elements {
            if let Some(n) = decl.kind.arity() {
                if decl.nodes.len() != n {
                    return Err(NetlistError::invalid(
                        &decl.name,
                        format!("expected {n} nodes, found {}", decl.nodes.len()),
                    ));
                }
            }
            if decl.kind == ElementKind::SubcktInstance {
                let target = decl.model_ref.clone().unwrap_or_default();
                let Some(sub) = self.net.subckts.get(&target) else {
                    return Err(NetlistError::UndefinedSubckt(target));
                };
                check_references(self.net, decl)
                    .map_err(|m| NetlistError::invalid(&decl.name, m))?;
                if self.stack.contains(&target) || self.stack.len() >= MAX_SUBCKT_DEPTH {
                    return Err(NetlistError::Recursion {
                        name: target,
                        depth: self.stack.len() + 1,
                    });
                }
                let inner_map: HashMap<&str, String> = sub
                    .ports
                    .iter()
                    .zip(&decl.nodes)
                    .map(|(p, n)| (p.as_str(), map_node(n)))
                    .collect();
                let inner_prefix = format!("{prefix}{}.", decl.name);
                self.stack.push(target);
                self.expand(&sub.elements, &inner_prefix, &inner_map)?;
                self.stack.pop();
                continue;
            }
            let device = self.resolve(decl)?;
            let nodes = decl
                .nodes
                .iter()
                .map(|n| {
                    let full = map_node(n);
                    self.node(&full)
                })
                .collect();
            self.elements.push(Element {
                name: format!("{prefix}{}", decl.name),
                device,
                nodes,
            });
        }
        Ok(())
    }
}

/// Expand every subcircuit instance and resolve model cards.
///
/// Internal nodes of instance `X1` become `X1.<node>`; nested instances
/// accumulate prefixes. Nodes are numbered in order of first appearance.
pub fn flatten(n: &Netlist) -> Result<FlatCircuit, NetlistError> {
    let mut f = Flattener {
        net: n,
        index: HashMap::new(),
        nodes: Vec::new(),
        elements: Vec::new(),
        stack: Vec::new(),
    };
    f.node(GROUND);
    f.expand(&n.elements, "", &HashMap::new())?;
    Ok(FlatCircuit {
        nodes: f.nodes,
        elements: f.elements,
    })
}
