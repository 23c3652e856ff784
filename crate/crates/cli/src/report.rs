use serde::Serialize;
use serde_json::{Map, Number, Value};

use crate::config::{OutputFormat, RunConfig};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Significant digits kept for every floating-point number in the output.
pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, Serialize)]
pub struct ReportEnvelope {
    pub tool_version: String,
    pub subcommand: String,
    pub config_echo: RunConfig,
    pub payload: Value,
    pub warnings: Vec<String>,
    /// Human-oriented preamble for text output, e.g. a formatted table.
    #[serde(skip)]
    pub text_preamble: Option<String>,
}

pub fn round_significant(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        // also folds -0.0 into 0.0
        return if v == 0.0 { 0.0 } else { v };
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v)
        .parse()
        .expect("formatted float parses")
}

/// Rounds every float to [`SIGNIFICANT_DIGITS`]; integers are left alone.
/// Object keys come out sorted because `serde_json::Map` is ordered.
pub fn normalize(value: Value) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => {
            let v = round_significant(n.as_f64().expect("f64 number"));
            Number::from_f64(v)
                .map(Value::Number)
                .unwrap_or(Value::Null)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(normalize).collect()),
        Value::Object(map) => Value::Object(
            map.into_iter()
                .map(|(k, v)| (k, normalize(v)))
                .collect::<Map<String, Value>>(),
        ),
        other => other,
    }
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    normalize(serde_json::to_value(v).expect("report types serialize"))
}

pub fn render(envelope: &ReportEnvelope, format: OutputFormat) -> String {
    let value = to_value(envelope);
    match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&value).expect("value serializes");
            s.push('\n');
            s
        }
        OutputFormat::Text => {
            let mut s = String::new();
            if let Some(pre) = &envelope.text_preamble {
                s.push_str(pre);
                s.push('\n');
            }
            s.push_str(&flatten_text(&value));
            s
        }
    }
}

/// One `path  value` line per leaf, paths padded to a common width.
pub fn flatten_text(value: &Value) -> String {
    let mut rows = Vec::new();
    flatten_into(value, String::new(), &mut rows);
    let width = rows
        .iter()
        .map(|(p, _)| p.chars().count())
        .max()
        .unwrap_or(0);
    let mut out = String::new();
    for (path, leaf) in rows {
        let pad = width - path.chars().count();
        out.push_str(&path);
        out.push_str(&" ".repeat(pad + 2));
        out.push_str(&leaf);
        out.push('\n');
    }
    out
}

fn flatten_into(value: &Value, path: String, rows: &mut Vec<(String, String)>) {
    match value {
        Value::Object(map) if !map.is_empty() => {
            for (k, v) in map {
                let p = if path.is_empty() {
                    k.clone()
                } else {
                    format!("{path}.{k}")
                };
                flatten_into(v, p, rows);
            }
        }
        Value::Array(items) if !items.is_empty() => {
            for (i, v) in items.iter().enumerate() {
                flatten_into(v, format!("{path}[{i}]"), rows);
            }
        }
        Value::Object(_) => rows.push((path, "{}".into())),
        Value::Array(_) => rows.push((path, "[]".into())),
        Value::String(s) => rows.push((path, s.clone())),
        other => rows.push((path, other.to_string())),
    }
}
