use serde_json::Value;

use super::{escape, Diagnostic, ScenarioDoc};
use crate::numeric::round_sig;

/// Canonical JSON: fixed key order, two-space indent, numbers rounded to
/// twelve significant digits, trailing newline.
pub fn to_json(doc: &ScenarioDoc) -> String {
    let mut v = serde_json::to_value(doc).expect("document serialises");
    round_numbers(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("value serialises");
    s.push('\n');
    s
}

/// Reads the JSON twin and validates it. Every diagnostic carries a JSON
/// pointer.
pub fn from_json(text: &str) -> Result<ScenarioDoc, Vec<Diagnostic>> {
    let mut v: Value = serde_json::from_str(text).map_err(|e| {
        vec![Diagnostic::error(format!("not valid JSON: {e}")).at_loc(&super::Loc::Root)]
    })?;
    round_numbers(&mut v);
    let doc: ScenarioDoc = serde_path_to_error::deserialize(&v).map_err(|e| {
        let mut pointer: String = e
            .path()
            .iter()
            .filter_map(|seg| match seg {
                serde_path_to_error::Segment::Seq { index } => Some(format!("/{index}")),
                serde_path_to_error::Segment::Map { key } => Some(format!("/{}", escape(key))),
                serde_path_to_error::Segment::Enum { variant } => Some(format!("/{}", escape(variant))),
                serde_path_to_error::Segment::Unknown => None,
            })
            .collect();
        let msg = e.inner().to_string();
        if let Some(field) = missing_field(&msg) {
            pointer.push('/');
            pointer.push_str(&escape(field));
        }
        vec![Diagnostic {
            pointer: Some(pointer),
            ..Diagnostic::error(format!("schema violation: {msg}"))
        }]
    })?;
    let errors = super::validate(&doc);
    if errors.is_empty() {
        Ok(doc)
    } else {
        Err(errors)
    }
}

fn missing_field(msg: &str) -> Option<&str> {
    let rest = msg.strip_prefix("missing field `")?;
    rest.split('`').next()
}

fn round_numbers(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if let Some(x) = n.as_f64().filter(|_| !n.is_u64() && !n.is_i64()) {
                if let Some(r) = serde_json::Number::from_f64(round_sig(x)) {
                    *n = r;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_numbers),
        Value::Object(map) => map.values_mut().for_each(round_numbers),
        _ => {}
    }
}
