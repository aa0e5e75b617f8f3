//! Deterministic plain-text rendering of report values.
//!
//! Objects render as sorted "key: value" lines (serde_json maps are ordered),
//! arrays of scalars inline, and everything else as dashed nested blocks, so
//! the same report is byte-identical across runs.

use serde_json::Value;

use kgraphs::phase::format_rat;
use kgraphs::scalar::Coef;
use kgraphs::Rat;

pub fn render_text(envelope: &Value) -> String {
    let mut out = String::new();
    if let Value::Object(map) = envelope {
        for (k, v) in map {
            walk(k, v, 0, &mut out);
        }
    }
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("~".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

// Keeps short scalar arrays on one line; long ones read better dashed.
fn inline_array(items: &[Value]) -> Option<String> {
    let parts: Option<Vec<String>> = items.iter().map(scalar).collect();
    parts
        .map(|p| format!("[{}]", p.join(", ")))
        .filter(|s| s.len() <= 72)
}

fn walk(key: &str, v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    if let Some(s) = scalar(v) {
        out.push_str(&format!("{pad}{key}: {s}\n"));
        return;
    }
    match v {
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str(&format!("{pad}{key}: []\n"));
            } else if let Some(inline) = inline_array(items) {
                out.push_str(&format!("{pad}{key}: {inline}\n"));
            } else {
                out.push_str(&format!("{pad}{key}:\n"));
                for item in items {
                    item_block(item, indent + 1, out);
                }
            }
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str(&format!("{pad}{key}: {{}}\n"));
            } else {
                out.push_str(&format!("{pad}{key}:\n"));
                for (k, val) in map {
                    walk(k, val, indent + 1, out);
                }
            }
        }
        _ => unreachable!(),
    }
}

fn item_block(item: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    if let Some(s) = scalar(item) {
        out.push_str(&format!("{pad}- {s}\n"));
        return;
    }
    match item {
        Value::Array(inner) => {
            if let Some(inline) = inline_array(inner) {
                out.push_str(&format!("{pad}- {inline}\n"));
            } else {
                out.push_str(&format!("{pad}-\n"));
                for i in inner {
                    item_block(i, indent + 1, out);
                }
            }
        }
        Value::Object(map) => {
            out.push_str(&format!("{pad}-\n"));
            for (k, val) in map {
                walk(k, val, indent + 1, out);
            }
        }
        _ => unreachable!(),
    }
}

/// Stable display for convolution coefficients: exact formal sums as
/// "q" or "q*e(angle)" terms, approximate values as "re+imi".
pub fn fmt_coef(c: &Coef) -> String {
    match c {
        Coef::Exact(terms) => {
            if terms.is_empty() {
                return "0".into();
            }
            let parts: Vec<String> = terms
                .iter()
                .map(|(angle, q)| {
                    if *angle == Rat::from_integer(0) {
                        format_rat(q)
                    } else {
                        format!("{}*e({})", format_rat(q), format_rat(angle))
                    }
                })
                .collect();
            parts.join(" + ")
        }
        Coef::Approx(z) => {
            if z.im >= 0.0 {
                format!("{}+{}i", z.re, z.im)
            } else {
                format!("{}-{}i", z.re, -z.im)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn scalars_and_arrays_render_inline() {
        let v = json!({"a": 1, "b": [1, 2], "c": [], "d": "x"});
        let text = render_text(&v);
        assert_eq!(text, "a: 1\nb: [1, 2]\nc: []\nd: x\n");
    }

    #[test]
    fn nested_blocks_indent() {
        let v = json!({"r": {"inner": [{"x": 1}]}});
        let text = render_text(&v);
        assert_eq!(text, "r:\n  inner:\n    -\n      x: 1\n");
    }

    #[test]
    fn exact_coefficients_print_phased_terms() {
        let c = Coef::phased_rat(Rat::new(1, 2), Rat::new(1, 3));
        assert_eq!(fmt_coef(&c), "1/2*e(1/3)");
        assert_eq!(fmt_coef(&Coef::zero()), "0");
    }
}
