use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};

pub(crate) fn load(path: &Path) -> Result<Map<String, Value>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::invalid(format!("cannot read config {}: {e}", path.display())))?;
    match serde_json::from_str::<Value>(&text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: "config must be a JSON object".into(),
        }),
        Err(e) => Err(Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        }),
    }
}

/// Objects merge key by key; anything else is replaced.
fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// `defaults < file < flags`, returned both typed and as the resolved JSON.
pub(crate) fn resolve<T>(defaults: T, file: &Map<String, Value>, flags: Map<String, Value>) -> Result<(T, Value)>
where
    T: Serialize + DeserializeOwned,
{
    let mut value = serde_json::to_value(defaults)?;
    merge(&mut value, Value::Object(file.clone()));
    merge(&mut value, Value::Object(flags));
    let typed: T = serde_json::from_value(value).map_err(|e| Error::invalid(format!("parameters: {e}")))?;
    // re-serialize so the manifest shows normalized values
    let resolved = serde_json::to_value(&typed)?;
    Ok((typed, resolved))
}

/// Collects `Some` flag values into an override map.
#[derive(Default)]
pub(crate) struct Overrides(Map<String, Value>);

impl Overrides {
    pub fn set<V: Serialize>(&mut self, key: &str, value: Option<V>) -> Result<&mut Self> {
        if let Some(v) = value {
            self.0.insert(key.to_owned(), serde_json::to_value(v)?);
        }
        Ok(self)
    }

    pub fn flag(&mut self, key: &str, on: bool) -> &mut Self {
        if on {
            self.0.insert(key.to_owned(), Value::Bool(true));
        }
        self
    }

    pub fn into_map(self) -> Map<String, Value> {
        self.0
    }
}
