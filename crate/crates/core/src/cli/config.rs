use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// Parsed `--key value` pairs (dashes in keys read as underscores).
pub type Overrides = BTreeMap<String, String>;

fn flag_value(raw: &str, default: &Value) -> Value {
    match default {
        Value::String(_) => Value::String(raw.to_string()),
        Value::Array(_) => match serde_json::from_str(raw) {
            Ok(v @ Value::Array(_)) => v,
            _ => Value::Array(
                raw.split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| serde_json::from_str(s.trim()).unwrap_or_else(|_| Value::String(s.trim().to_string())))
                    .collect(),
            ),
        },
        _ => serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string())),
    }
}

/// Resolves a config: defaults, then the JSON object in `path`, then flags.
///
/// Unknown keys in the file or among the flags and values of the wrong type
/// are config errors naming the key.
pub fn load_config<T>(path: Option<&Path>, overrides: &Overrides) -> Result<T>
where
    T: Serialize + DeserializeOwned + Default,
{
    let defaults = match serde_json::to_value(T::default())? {
        Value::Object(m) => m,
        _ => unreachable!("configs serialize to objects"),
    };
    let mut merged: Map<String, Value> = defaults.clone();
    if let Some(p) = path {
        let text = std::fs::read_to_string(p)?;
        let file: Value = if text.trim().is_empty() {
            Value::Object(Map::new())
        } else {
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
        };
        let Value::Object(file) = file else {
            return Err(Error::Config(format!("{}: expected a JSON object", p.display())));
        };
        for (k, v) in file {
            if !defaults.contains_key(&k) {
                return Err(Error::Config(format!("unknown config key `{k}`")));
            }
            merged.insert(k, v);
        }
    }
    for (k, raw) in overrides {
        let default = defaults
            .get(k)
            .ok_or_else(|| Error::Config(format!("unknown config key `{k}`")))?;
        merged.insert(k.clone(), flag_value(raw, default));
    }
    for (k, v) in &merged {
        let mut probe = defaults.clone();
        probe.insert(k.clone(), v.clone());
        serde_json::from_value::<T>(Value::Object(probe))
            .map_err(|e| Error::Config(format!("bad value for `{k}`: {e}")))?;
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| Error::Config(e.to_string()))
}
