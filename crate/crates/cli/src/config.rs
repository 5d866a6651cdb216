//! JSON run configuration. Keys mirror the long flag names (`tau-a` or
//! `tau_a`); values may be strings, numbers or booleans.

use std::path::Path;

use serde_json::{Map, Value};

use crate::Failure;

#[derive(Debug, Default)]
pub struct Config {
    values: Map<String, Value>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, Failure> {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| Failure::Usage(format!("config is not valid JSON: {e}")))?;
        let Value::Object(raw) = value else {
            return Err(Failure::Usage("config must be a JSON object".into()));
        };
        let values = raw
            .into_iter()
            .map(|(k, v)| (k.replace('_', "-"), v))
            .collect();
        Ok(Self { values })
    }

    pub fn get(&self, key: &str) -> Result<Option<String>, Failure> {
        match self.values.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(Value::Number(n)) => Ok(Some(n.to_string())),
            Some(Value::Bool(b)) => Ok(Some(b.to_string())),
            Some(other) => Err(Failure::Usage(format!(
                "config key '{key}': expected a string or number, got {other}"
            ))),
        }
    }

    pub fn flag(&self, key: &str) -> Result<bool, Failure> {
        match self.values.get(key) {
            None | Some(Value::Null) => Ok(false),
            Some(Value::Bool(b)) => Ok(*b),
            Some(other) => Err(Failure::Usage(format!(
                "config key '{key}': expected true or false, got {other}"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_and_values() {
        let c = Config::parse(r#"{"tau_a": "1ps", "points": 5, "normalized": true}"#).unwrap();
        assert_eq!(c.get("tau-a").unwrap().as_deref(), Some("1ps"));
        assert_eq!(c.get("points").unwrap().as_deref(), Some("5"));
        assert!(c.flag("normalized").unwrap());
        assert!(!c.flag("missing").unwrap());
        assert!(Config::parse("[1]").is_err());
        assert!(Config::parse(r#"{"pump": [1]}"#).unwrap().get("pump").is_err());
    }
}
