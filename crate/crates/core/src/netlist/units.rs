//! Numeric literals with SPICE engineering suffixes.

/// Parse a number such as `1k`, `2.5meg`, `10n`, `1e-3`. Suffixes are
/// case-insensitive; `m` is milli and `meg` is mega. Any other trailing text
/// makes the literal malformed.
pub fn parse_value(token: &str) -> Option<f64> {
    let lower = token.to_ascii_lowercase();
    let (mantissa, scale) = split_suffix(&lower);
    if mantissa.is_empty() {
        return None;
    }
    // reject things Rust accepts but SPICE does not, e.g. "inf", "nan"
    if !mantissa
        .chars()
        .all(|c| c.is_ascii_digit() || matches!(c, '.' | 'e' | '+' | '-'))
    {
        return None;
    }
    let v: f64 = match (scale.log10().round() as i32, mantissa.contains('e')) {
        (0, _) => mantissa.parse().ok()?,
        // shift the decimal exponent so e.g. `5f` rounds exactly like `5e-15`
        (exp, false) => format!("{mantissa}e{exp}").parse().ok()?,
        (_, true) => mantissa.parse::<f64>().ok()? * scale,
    };
    v.is_finite().then_some(v)
}

fn split_suffix(s: &str) -> (&str, f64) {
    if let Some(m) = s.strip_suffix("meg") {
        return (m, 1e6);
    }
    let table = [
        ('f', 1e-15),
        ('p', 1e-12),
        ('n', 1e-9),
        ('u', 1e-6),
        ('m', 1e-3),
        ('k', 1e3),
        ('g', 1e9),
    ];
    if let Some(last) = s.chars().last() {
        for (c, scale) in table {
            if last == c {
                return (&s[..s.len() - 1], scale);
            }
        }
    }
    (s, 1.0)
}

/// Format a value so that [`parse_value`] recovers it bit-for-bit.
pub fn format_value(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{v}")
    } else {
        let plain = format!("{v}");
        let sci = format!("{v:e}");
        if plain.len() <= sci.len() {
            plain
        } else {
            sci
        }
    }
}
