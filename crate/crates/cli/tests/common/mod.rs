#![allow(dead_code)]

//! Minimal JSON Schema checker covering the keywords the committed schemas
//! use: `$ref` (local), `type`, `properties`, `required`,
//! `additionalProperties: false`, `items`, `minItems`, `enum`, `const`,
//! `oneOf`, `minimum`, `maximum`, `exclusiveMinimum`, `exclusiveMaximum`.

use std::path::PathBuf;

use serde_json::Value;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn schema(name: &str) -> Value {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("schema")
        .join(name);
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub fn validate(root: &Value, instance: &Value) -> Vec<String> {
    let mut errors = Vec::new();
    check(root, root, instance, "$", &mut errors);
    errors
}

fn resolve<'a>(root: &'a Value, reference: &str) -> &'a Value {
    let path = reference.strip_prefix("#/").expect("local reference");
    path.split('/').fold(root, |node, key| &node[key])
}

fn type_matches(ty: &str, v: &Value) -> bool {
    match ty {
        "null" => v.is_null(),
        "boolean" => v.is_boolean(),
        "string" => v.is_string(),
        "array" => v.is_array(),
        "object" => v.is_object(),
        "number" => v.is_number(),
        "integer" => v.is_u64() || v.is_i64() || v.as_f64().is_some_and(|f| f.fract() == 0.0),
        other => panic!("unsupported type {other}"),
    }
}

fn check(root: &Value, schema: &Value, v: &Value, at: &str, errors: &mut Vec<String>) {
    let s = match schema.as_object() {
        Some(s) => s,
        None => return,
    };
    if let Some(r) = s.get("$ref").and_then(Value::as_str) {
        check(root, resolve(root, r), v, at, errors);
    }
    if let Some(ty) = s.get("type").and_then(Value::as_str) {
        if !type_matches(ty, v) {
            errors.push(format!("{at}: expected {ty}, got {v}"));
            return;
        }
    }
    if let Some(c) = s.get("const") {
        if c != v && !(c.is_number() && c.as_f64() == v.as_f64()) {
            errors.push(format!("{at}: expected {c}"));
        }
    }
    if let Some(options) = s.get("enum").and_then(Value::as_array) {
        let hit = options
            .iter()
            .any(|o| o == v || (o.is_number() && o.as_f64() == v.as_f64()));
        if !hit {
            errors.push(format!("{at}: {v} not in enum"));
        }
    }
    if let Some(x) = v.as_f64() {
        let bound = |k: &str| s.get(k).and_then(Value::as_f64);
        if bound("minimum").is_some_and(|m| x < m) {
            errors.push(format!("{at}: {x} below minimum"));
        }
        if bound("maximum").is_some_and(|m| x > m) {
            errors.push(format!("{at}: {x} above maximum"));
        }
        if bound("exclusiveMinimum").is_some_and(|m| x <= m) {
            errors.push(format!("{at}: {x} not above exclusive minimum"));
        }
        if bound("exclusiveMaximum").is_some_and(|m| x >= m) {
            errors.push(format!("{at}: {x} not below exclusive maximum"));
        }
    }
    if let Some(obj) = v.as_object() {
        let props = s.get("properties").and_then(Value::as_object);
        if let Some(req) = s.get("required").and_then(Value::as_array) {
            for k in req.iter().filter_map(Value::as_str) {
                if !obj.contains_key(k) {
                    errors.push(format!("{at}: missing `{k}`"));
                }
            }
        }
        for (k, child) in obj {
            match props.and_then(|p| p.get(k)) {
                Some(sub) => check(root, sub, child, &format!("{at}.{k}"), errors),
                None => {
                    if s.get("additionalProperties") == Some(&Value::Bool(false)) {
                        errors.push(format!("{at}: unexpected `{k}`"));
                    }
                }
            }
        }
    }
    if let Some(items) = v.as_array() {
        if let Some(min) = s.get("minItems").and_then(Value::as_u64) {
            if (items.len() as u64) < min {
                errors.push(format!("{at}: fewer than {min} items"));
            }
        }
        if let Some(sub) = s.get("items") {
            for (i, item) in items.iter().enumerate() {
                check(root, sub, item, &format!("{at}[{i}]"), errors);
            }
        }
    }
    if let Some(options) = s.get("oneOf").and_then(Value::as_array) {
        let passing = options
            .iter()
            .filter(|o| {
                let mut e = Vec::new();
                check(root, o, v, at, &mut e);
                e.is_empty()
            })
            .count();
        if passing != 1 {
            errors.push(format!("{at}: {passing} oneOf branches match"));
        }
    }
}
