use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

use crate::error::CliError;

/// A flag value written into the resolved configuration at `path`.
#[derive(Debug, Clone)]
pub struct Override {
    pub path: Vec<&'static str>,
    pub value: Value,
}

impl Override {
    pub fn new(path: &[&'static str], value: impl Into<Value>) -> Self {
        Self { path: path.to_vec(), value: value.into() }
    }
}

pub fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Recursively merges `patch` into `base`; objects merge key by key, anything else replaces.
pub fn merge(base: &mut Value, patch: &Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                merge(b.entry(k.clone()).or_insert(Value::Null), v);
            }
        }
        (b, p) => *b = p.clone(),
    }
}

pub fn apply(base: &mut Value, overrides: &[Override]) {
    for o in overrides {
        let mut cursor = &mut *base;
        for key in &o.path {
            if !cursor.is_object() {
                *cursor = Value::Object(Map::new());
            }
            cursor = cursor.as_object_mut().expect("object").entry(key.to_string()).or_insert(Value::Null);
        }
        *cursor = o.value.clone();
    }
}

pub fn typed<T: DeserializeOwned>(value: &Value, what: &str) -> Result<T, CliError> {
    serde_json::from_value(value.clone()).map_err(|e| CliError::Config(format!("{what}: {e}")))
}

/// Sweep files are JSON arrays of patch objects.
pub fn read_sweep(path: &Path) -> Result<Vec<Value>, CliError> {
    match read_json(path)? {
        Value::Array(items) if !items.is_empty() => {
            if items.iter().all(Value::is_object) {
                Ok(items)
            } else {
                Err(CliError::Config(format!("{}: sweep entries must be objects", path.display())))
            }
        }
        _ => Err(CliError::Config(format!("{}: sweep must be a non-empty array", path.display()))),
    }
}
