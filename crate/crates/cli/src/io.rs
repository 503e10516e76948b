use std::fs;

use anyhow::{Context, Result};
use designforge::pps::{PairSet, SpecJson};
use designforge::{infer_params, PpsSpec};
use serde_json::{json, Value};

pub fn read_json<T: serde::de::DeserializeOwned>(path: &str) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {path}"))
}

/// Reads either a bare object or the `--json` output wrapping it under `key`.
pub fn read_wrapped<T: serde::de::DeserializeOwned>(path: &str, key: &str) -> Result<T> {
    let v: Value = read_json(path)?;
    let inner = match v.get(key) {
        Some(inner) if v.get("v").is_none() => inner.clone(),
        _ => v,
    };
    serde_json::from_value(inner).with_context(|| format!("parsing {path}"))
}

/// A pair set: bare, wrapped under `set`, or a catalog entry.
pub fn read_pairs(path: &str) -> Result<PairSet> {
    let mut v: Value = read_json(path)?;
    if let Some(set) = v.get("set") {
        v = set.clone();
    } else if let (None, Some(n)) = (v.get("v"), v.pointer("/params/v")) {
        v = json!({ "v": n, "pairs": v["pairs"] });
    }
    serde_json::from_value(v).with_context(|| format!("parsing {path}"))
}

pub fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

pub fn spec_json(spec: &PpsSpec) -> Value {
    serde_json::to_value(SpecJson::from(spec)).expect("serializable")
}

pub fn pair_lines(set: &PairSet) -> String {
    let mut out = String::new();
    for (i, (x, y)) in set.pairs().iter().enumerate() {
        out.push_str(&format!("{{{x}, {y}}}"));
        out.push_str(if (i + 1) % 8 == 0 { "\n" } else { " " });
    }
    out.trim_end().to_string()
}

/// A pair set with its parameters, as JSON or a human summary.
pub fn emit_set(json_out: bool, set: &PairSet, spec: &PpsSpec, extra: Value) {
    if json_out {
        let mut v = json!({ "set": set, "spec": spec_json(spec), "label": spec.label() });
        if let (Value::Object(m), Value::Object(e)) = (&mut v, extra) {
            m.extend(e);
        }
        print_json(&v);
    } else {
        println!(
            "{:?} over Z_{} with {} pairs",
            spec.label(),
            set.v(),
            set.len()
        );
        if let Value::Object(e) = extra {
            for (k, v) in e {
                println!("{k}: {v}");
            }
        }
        println!("{}", pair_lines(set));
    }
}

pub fn label_of(set: &PairSet) -> Value {
    serde_json::to_value(infer_params(set)).expect("serializable")
}
