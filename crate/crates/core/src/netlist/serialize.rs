use std::fmt::Write;

use super::units::format_value;
use super::{Directive, ElementDecl, ElementKind, Netlist, SourceSpec};
use crate::solver::IntegrationMethod;

fn write_element(out: &mut String, e: &ElementDecl) {
    let mut line = e.name.clone();
    for n in &e.nodes {
        line.push(' ');
        line.push_str(n);
    }
    match e.kind {
        ElementKind::Resistor | ElementKind::Capacitor => {
            let v = e.value().unwrap_or(0.0);
            let _ = write!(line, " {}", format_value(v));
        }
        ElementKind::VSource => match e.source.unwrap_or(SourceSpec::Dc(0.0)) {
            SourceSpec::Dc(v) => {
                let _ = write!(line, " DC {}", format_value(v));
            }
            SourceSpec::Pulse(p) => {
                let vals = [p.v0, p.v1, p.delay, p.rise, p.fall, p.width, p.period];
                let body: Vec<String> = vals.iter().map(|v| format_value(*v)).collect();
                let _ = write!(line, " PULSE({})", body.join(" "));
            }
        },
        ElementKind::Diode | ElementKind::Rtd | ElementKind::Mfet | ElementKind::SubcktInstance => {
            if let Some(m) = &e.model_ref {
                line.push(' ');
                line.push_str(m);
            }
            for (k, v) in &e.params {
                let _ = write!(line, " {}={}", k.to_ascii_uppercase(), format_value(*v));
            }
        }
    }
    out.push_str(&line);
    out.push('\n');
}

/// Emit a netlist in the dialect accepted by [`super::parse_netlist`].
///
/// Output order is fixed: title, models, subcircuits, top-level elements,
/// analysis directives, `.end`. Identical netlists serialize to identical text.
pub fn serialize(n: &Netlist) -> String {
    let mut out = String::new();
    if !n.title.is_empty() {
        let _ = writeln!(out, "* {}", n.title);
    }
    for card in n.models.values() {
        let params: Vec<String> = card
            .params
            .iter()
            .map(|(k, v)| format!("{k}={}", format_value(*v)))
            .collect();
        let _ = writeln!(
            out,
            ".model {} {}({})",
            card.name,
            card.kind.keyword(),
            params.join(" ")
        );
    }
    for sub in n.subckts.values() {
        let mut head = format!(".subckt {}", sub.name);
        for p in &sub.ports {
            head.push(' ');
            head.push_str(p);
        }
        out.push_str(&head);
        out.push('\n');
        for e in &sub.elements {
            write_element(&mut out, e);
        }
        let _ = writeln!(out, ".ends {}", sub.name);
    }
    for e in &n.elements {
        write_element(&mut out, e);
    }
    for d in &n.directives {
        match d {
            Directive::Tran { step, stop, method } => {
                let _ = write!(out, ".tran {} {}", format_value(*step), format_value(*stop));
                match method {
                    Some(IntegrationMethod::BackwardEuler) => out.push_str(" be"),
                    Some(IntegrationMethod::Trapezoidal) => out.push_str(" trap"),
                    None => {}
                }
                out.push('\n');
            }
            Directive::Dc {
                source,
                start,
                stop,
                step,
            } => {
                let _ = writeln!(
                    out,
                    ".dc {source} {} {} {}",
                    format_value(*start),
                    format_value(*stop),
                    format_value(*step)
                );
            }
        }
    }
    out.push_str(".end\n");
    out
}
