//! Diagram file format: `{"dims": {"0": [[b, d], ...], "1": [...]}}`, with
//! the string `"inf"` standing for an infinite death. Numbers are written
//! with 17 significant digits so that they parse back to the same bits.

use serde_json::Value;

use super::{PersistenceDiagram, PersistencePair};
use crate::error::{Error, Result};

pub fn diagram_to_json(d: &PersistenceDiagram) -> String {
    let mut out = String::from("{\"dims\":{");
    for dim in 0..=1 {
        if dim > 0 {
            out.push(',');
        }
        out.push_str(&format!("\"{dim}\":["));
        for (i, p) in d.pairs(dim).iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push('[');
            out.push_str(&sig17(p.birth));
            out.push(',');
            if p.death.is_infinite() {
                out.push_str("\"inf\"");
            } else {
                out.push_str(&sig17(p.death));
            }
            out.push(']');
        }
        out.push(']');
    }
    out.push_str("}}\n");
    out
}

/// Decimal rendering with exactly 17 significant digits; positional for
/// moderate exponents, scientific otherwise.
pub(crate) fn sig17(x: f64) -> String {
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    if (0..16).contains(&exp) {
        let split = exp as usize + 1;
        format!("{sign}{}.{}", &digits[..split], &digits[split..])
    } else if (-5..0).contains(&exp) {
        format!("{sign}0.{}{digits}", "0".repeat((-exp - 1) as usize))
    } else {
        format!("{sign}{mantissa}e{exp}")
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Parse {
        line: 0,
        message: msg.into(),
    }
}

pub fn diagram_from_json(text: &str) -> Result<PersistenceDiagram> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    let dims = value
        .as_object()
        .and_then(|o| o.get("dims"))
        .and_then(Value::as_object)
        .ok_or_else(|| bad("expected an object with a `dims` object"))?;
    let mut h0 = Vec::new();
    let mut h1 = Vec::new();
    for (key, pairs) in dims {
        let target = match key.as_str() {
            "0" => &mut h0,
            "1" => &mut h1,
            other => return Err(bad(format!("unsupported dimension key `{other}`"))),
        };
        let pairs = pairs
            .as_array()
            .ok_or_else(|| bad(format!("dimension {key} must be an array")))?;
        for pair in pairs {
            target.push(parse_pair(pair)?);
        }
    }
    Ok(PersistenceDiagram::new(h0, h1))
}

fn parse_pair(v: &Value) -> Result<PersistencePair> {
    let items = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| bad("each pair must be a two-element array"))?;
    let birth = items[0]
        .as_f64()
        .filter(|b| b.is_finite())
        .ok_or_else(|| bad("birth must be a finite number"))?;
    let death = match &items[1] {
        Value::String(s) if s == "inf" => f64::INFINITY,
        other => other
            .as_f64()
            .filter(|d| d.is_finite())
            .ok_or_else(|| bad("death must be a number or \"inf\""))?,
    };
    if death < birth {
        return Err(bad(format!("death {death} precedes birth {birth}")));
    }
    Ok(PersistencePair::new(birth, death))
}
