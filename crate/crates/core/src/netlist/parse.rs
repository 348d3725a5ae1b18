use std::collections::{BTreeMap, HashSet};

use super::units::parse_value;
use super::{
    Directive, ElementDecl, ElementKind, ModelCard, ModelKind, Netlist, NetlistError, Pulse,
    SourceSpec, SubcktDef, GROUND,
};
use crate::solver::IntegrationMethod;

type Result<T> = std::result::Result<T, NetlistError>;

/// A statement after joining `+` continuations, tagged with its first line.
struct Logical {
    line: usize,
    tokens: Vec<String>,
}

fn tokenize(text: &str) -> Vec<String> {
    // glue `a = b` into `a=b`, then treat parentheses and commas as blanks
    let mut glued = String::with_capacity(text.len());
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '(' | ')' | ',' => glued.push(' '),
            '=' => {
                while glued.ends_with(' ') || glued.ends_with('\t') {
                    glued.pop();
                }
                glued.push('=');
                while matches!(chars.peek(), Some(' ') | Some('\t')) {
                    chars.next();
                }
            }
            _ => glued.push(c),
        }
    }
    glued.split_whitespace().map(str::to_string).collect()
}

fn logical_lines(text: &str) -> Result<(String, Vec<Logical>)> {
    let mut title = String::new();
    let mut out: Vec<Logical> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix('*') {
            if idx == 0 {
                title = rest.trim().to_string();
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('+') {
            match out.last_mut() {
                Some(prev) => prev.tokens.extend(tokenize(rest)),
                None => {
                    return Err(NetlistError::parse(
                        line_no,
                        "continuation line with nothing to continue",
                    ))
                }
            }
            continue;
        }
        out.push(Logical {
            line: line_no,
            tokens: tokenize(line),
        });
    }
    Ok((title, out))
}

fn number(line: usize, tok: &str) -> Result<f64> {
    parse_value(tok).ok_or_else(|| NetlistError::parse(line, format!("malformed number `{tok}`")))
}

fn key_value(line: usize, tok: &str) -> Result<(String, f64)> {
    let (k, v) = tok
        .split_once('=')
        .ok_or_else(|| NetlistError::parse(line, format!("expected NAME=value, got `{tok}`")))?;
    if k.is_empty() {
        return Err(NetlistError::parse(
            line,
            format!("missing name in `{tok}`"),
        ));
    }
    Ok((k.to_string(), number(line, v)?))
}

fn parse_source(line: usize, toks: &[String]) -> Result<SourceSpec> {
    let Some(first) = toks.first() else {
        return Err(NetlistError::parse(line, "voltage source needs a value"));
    };
    let spec = match first.to_ascii_uppercase().as_str() {
        "DC" => {
            if toks.len() != 2 {
                return Err(NetlistError::parse(line, "expected `DC value`"));
            }
            SourceSpec::Dc(number(line, &toks[1])?)
        }
        "PULSE" => {
            if toks.len() != 8 {
                return Err(NetlistError::parse(
                    line,
                    "PULSE takes 7 values: v0 v1 delay rise fall width period",
                ));
            }
            let v: Vec<f64> = toks[1..]
                .iter()
                .map(|t| number(line, t))
                .collect::<Result<_>>()?;
            SourceSpec::Pulse(Pulse {
                v0: v[0],
                v1: v[1],
                delay: v[2],
                rise: v[3],
                fall: v[4],
                width: v[5],
                period: v[6],
            })
        }
        _ => {
            if toks.len() != 1 {
                return Err(NetlistError::parse(
                    line,
                    "unexpected tokens after source value",
                ));
            }
            SourceSpec::Dc(number(line, first)?)
        }
    };
    spec.validate().map_err(|m| NetlistError::parse(line, m))?;
    Ok(spec)
}

fn parse_element(line: usize, toks: &[String]) -> Result<ElementDecl> {
    let name = &toks[0];
    let letter = name.chars().next().unwrap_or(' ');
    let kind = ElementKind::from_letter(letter)
        .ok_or_else(|| NetlistError::parse(line, format!("unknown element kind `{letter}`")))?;
    let args = &toks[1..];
    let arity_err = |n: usize| {
        NetlistError::parse(
            line,
            format!("{name}: expected {n} nodes, found {}", args.len().min(n)),
        )
    };
    let mut decl = ElementDecl {
        name: name.clone(),
        kind,
        nodes: Vec::new(),
        params: BTreeMap::new(),
        model_ref: None,
        source: None,
    };
    match kind {
        ElementKind::Resistor | ElementKind::Capacitor => {
            if args.len() < 3 {
                return Err(arity_err(2));
            }
            if args.len() > 3 {
                return Err(NetlistError::parse(
                    line,
                    format!("{name}: too many fields"),
                ));
            }
            let v = number(line, &args[2])?;
            if v <= 0.0 {
                return Err(NetlistError::parse(
                    line,
                    format!("{name}: value must be > 0"),
                ));
            }
            decl.nodes = args[..2].to_vec();
            decl.params.insert("value".into(), v);
        }
        ElementKind::VSource => {
            if args.len() < 3 {
                return Err(arity_err(2));
            }
            decl.nodes = args[..2].to_vec();
            decl.source = Some(parse_source(line, &args[2..])?);
        }
        ElementKind::Diode | ElementKind::Rtd | ElementKind::Mfet => {
            let n = kind.arity().unwrap_or(2);
            if args.len() < n + 1 || args[..=n].iter().any(|t| t.contains('=')) {
                return Err(arity_err(n));
            }
            decl.nodes = args[..n].to_vec();
            decl.model_ref = Some(args[n].to_ascii_uppercase());
            for tok in &args[n + 1..] {
                let (k, v) = key_value(line, tok)?;
                let k = k.to_ascii_lowercase();
                if k != "area" || kind == ElementKind::Mfet {
                    return Err(NetlistError::parse(
                        line,
                        format!("{name}: unknown parameter `{k}`"),
                    ));
                }
                if v <= 0.0 {
                    return Err(NetlistError::parse(
                        line,
                        format!("{name}: AREA must be > 0"),
                    ));
                }
                decl.params.insert(k, v);
            }
        }
        ElementKind::SubcktInstance => {
            if args.len() < 2 || args.iter().any(|t| t.contains('=')) {
                return Err(NetlistError::parse(
                    line,
                    format!("{name}: expected nodes followed by a subcircuit name"),
                ));
            }
            decl.nodes = args[..args.len() - 1].to_vec();
            decl.model_ref = Some(args[args.len() - 1].to_ascii_uppercase());
        }
    }
    Ok(decl)
}

fn parse_model(line: usize, toks: &[String]) -> Result<ModelCard> {
    if toks.len() < 3 {
        return Err(NetlistError::parse(line, ".model needs a name and a type"));
    }
    let kind = match toks[2].to_ascii_lowercase().as_str() {
        "d" | "diode" => ModelKind::Diode,
        "rtd" => ModelKind::Rtd,
        "mfet" => ModelKind::Mfet,
        other => {
            return Err(NetlistError::parse(
                line,
                format!("unknown model type `{other}`"),
            ));
        }
    };
    let mut params = BTreeMap::new();
    for tok in &toks[3..] {
        let (k, v) = key_value(line, tok)?;
        let k = k.to_ascii_uppercase();
        if !kind.param_names().contains(&k.as_str()) {
            return Err(NetlistError::parse(
                line,
                format!("unknown {} parameter `{k}`", kind.keyword()),
            ));
        }
        params.insert(k, v);
    }
    let card = ModelCard {
        name: toks[1].to_ascii_uppercase(),
        kind,
        params,
    };
    let checked = match kind {
        ModelKind::Diode => card.diode_params().map(|_| ()),
        ModelKind::Rtd => card.rtd_params().map(|_| ()),
        ModelKind::Mfet => card.mfet_params().map(|_| ()),
    };
    checked.map_err(|e| NetlistError::parse(line, e.to_string()))?;
    Ok(card)
}

fn parse_method(line: usize, tok: &str) -> Result<IntegrationMethod> {
    match tok.to_ascii_lowercase().as_str() {
        "be" | "euler" => Ok(IntegrationMethod::BackwardEuler),
        "trap" | "trapezoidal" => Ok(IntegrationMethod::Trapezoidal),
        other => Err(NetlistError::parse(
            line,
            format!("unknown integration method `{other}`"),
        )),
    }
}

struct OpenSubckt {
    def: SubcktDef,
    names: HashSet<String>,
}

/// Parse a complete netlist file. Nothing is returned on error.
pub fn parse_netlist(text: &str) -> Result<Netlist> {
    let (title, lines) = logical_lines(text)?;
    let mut net = Netlist::new(title);
    let mut top_names: HashSet<String> = HashSet::new();
    let mut open: Option<OpenSubckt> = None;
    // (subckt scope or None for top level, element index, line)
    let mut element_lines: Vec<(Option<String>, usize, usize)> = Vec::new();

    for Logical { line, tokens } in lines {
        if tokens.is_empty() {
            continue;
        }
        let head = tokens[0].to_ascii_lowercase();
        if head.starts_with('.') {
            match head.as_str() {
                ".end" => break,
                ".subckt" => {
                    if open.is_some() {
                        return Err(NetlistError::parse(
                            line,
                            "nested .subckt definitions are not supported",
                        ));
                    }
                    if tokens.len() < 2 {
                        return Err(NetlistError::parse(line, ".subckt needs a name"));
                    }
                    let name = tokens[1].to_ascii_uppercase();
                    if net.subckts.contains_key(&name) {
                        return Err(NetlistError::parse(
                            line,
                            format!("subcircuit `{name}` defined twice"),
                        ));
                    }
                    let ports: Vec<String> = tokens[2..].to_vec();
                    let mut seen = HashSet::new();
                    for p in &ports {
                        if p == GROUND {
                            return Err(NetlistError::parse(
                                line,
                                "ground node 0 cannot be a subcircuit port",
                            ));
                        }
                        if p.contains('=') {
                            return Err(NetlistError::parse(
                                line,
                                "subcircuit parameters are not supported",
                            ));
                        }
                        if !seen.insert(p.clone()) {
                            return Err(NetlistError::parse(line, format!("duplicate port `{p}`")));
                        }
                    }
                    open = Some(OpenSubckt {
                        def: SubcktDef {
                            name,
                            ports,
                            elements: Vec::new(),
                        },
                        names: HashSet::new(),
                    });
                }
                ".ends" => {
                    let Some(sub) = open.take() else {
                        return Err(NetlistError::parse(line, ".ends without .subckt"));
                    };
                    if let Some(n) = tokens.get(1) {
                        if !n.eq_ignore_ascii_case(&sub.def.name) {
                            return Err(NetlistError::parse(
                                line,
                                format!(".ends {n} closes `{}`", sub.def.name),
                            ));
                        }
                    }
                    net.subckts.insert(sub.def.name.clone(), sub.def);
                }
                ".model" => {
                    let card = parse_model(line, &tokens)?;
                    if net.models.contains_key(&card.name) {
                        return Err(NetlistError::parse(
                            line,
                            format!("model `{}` defined twice", card.name),
                        ));
                    }
                    net.models.insert(card.name.clone(), card);
                }
                ".tran" => {
                    if !(3..=4).contains(&tokens.len()) {
                        return Err(NetlistError::parse(
                            line,
                            "expected `.tran step stop [be|trap]`",
                        ));
                    }
                    let step = number(line, &tokens[1])?;
                    let stop = number(line, &tokens[2])?;
                    if !(step > 0.0 && step <= stop) {
                        return Err(NetlistError::parse(line, ".tran needs 0 < step <= stop"));
                    }
                    let method = tokens.get(3).map(|t| parse_method(line, t)).transpose()?;
                    net.directives.push(Directive::Tran { step, stop, method });
                }
                ".dc" => {
                    if tokens.len() != 5 {
                        return Err(NetlistError::parse(
                            line,
                            "expected `.dc source start stop step`",
                        ));
                    }
                    let step = number(line, &tokens[4])?;
                    if step <= 0.0 {
                        return Err(NetlistError::parse(line, ".dc step must be > 0"));
                    }
                    net.directives.push(Directive::Dc {
                        source: tokens[1].clone(),
                        start: number(line, &tokens[2])?,
                        stop: number(line, &tokens[3])?,
                        step,
                    });
                }
                other => {
                    return Err(NetlistError::parse(
                        line,
                        format!("unsupported control card `{other}`"),
                    ));
                }
            }
            continue;
        }

        let decl = parse_element(line, &tokens)?;
        let key = decl.name.to_ascii_uppercase();
        match open.as_mut() {
            Some(sub) => {
                if !sub.names.insert(key) {
                    return Err(NetlistError::parse(
                        line,
                        format!("duplicate element `{}`", decl.name),
                    ));
                }
                element_lines.push((Some(sub.def.name.clone()), sub.def.elements.len(), line));
                sub.def.elements.push(decl);
            }
            None => {
                if !top_names.insert(key) {
                    return Err(NetlistError::parse(
                        line,
                        format!("duplicate element `{}`", decl.name),
                    ));
                }
                element_lines.push((None, net.elements.len(), line));
                net.elements.push(decl);
            }
        }
    }
    if let Some(sub) = open {
        return Err(NetlistError::parse(
            text.lines().count().max(1),
            format!("missing .ends for `{}`", sub.def.name),
        ));
    }

    // references can point forward, so resolve them once everything is read
    for (scope, idx, line) in element_lines {
        let decl = match &scope {
            Some(s) => &net.subckts[s].elements[idx],
            None => &net.elements[idx],
        };
        check_references(&net, decl).map_err(|m| NetlistError::parse(line, m))?;
    }
    Ok(net)
}

pub(super) fn check_references(
    net: &Netlist,
    decl: &ElementDecl,
) -> std::result::Result<(), String> {
    let Some(target) = &decl.model_ref else {
        return Ok(());
    };
    if decl.kind == ElementKind::SubcktInstance {
        let sub = net
            .subckts
            .get(target)
            .ok_or_else(|| format!("{}: undefined subcircuit `{target}`", decl.name))?;
        if sub.ports.len() != decl.nodes.len() {
            return Err(format!(
                "{}: subcircuit `{target}` has {} ports, instance connects {}",
                decl.name,
                sub.ports.len(),
                decl.nodes.len()
            ));
        }
    } else {
        let card = net
            .models
            .get(target)
            .ok_or_else(|| format!("{}: undefined model `{target}`", decl.name))?;
        if card.kind.element_kind() != decl.kind {
            return Err(format!(
                "{}: model `{target}` is a {} model",
                decl.name,
                card.kind.keyword()
            ));
        }
    }
    Ok(())
}
