//! Flat key-value configuration files.
//!
//! A config file is a TOML table of scalars. Keys are case-sensitive and `_`
//! and `-` are interchangeable, so `max_depth = 10` and `--max-depth 10` name
//! the same setting. Command-line flags are applied on top of the file.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvConfig {
    values: BTreeMap<String, String>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('_', "-")
}

impl KvConfig {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        let mut out = Self::new();
        for (key, value) in table {
            let text = match value {
                toml::Value::String(s) => s,
                toml::Value::Integer(i) => i.to_string(),
                toml::Value::Float(f) => f.to_string(),
                toml::Value::Boolean(b) => b.to_string(),
                other => {
                    return Err(Error::Config(format!(
                        "key {key:?} must be a scalar, found {}",
                        other.type_str()
                    )))
                }
            };
            out.set(&key, text);
        }
        Ok(out)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(normalize(key), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(&normalize(key)).map(String::as_str)
    }

    /// Parsed value of `key`, or `None` when unset.
    pub fn parse_opt<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|raw| {
                raw.parse::<T>()
                    .map_err(|_| Error::Config(format!("bad value {raw:?} for {key:?}")))
            })
            .transpose()
    }

    pub fn parse_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.parse_opt(key)?.unwrap_or(default))
    }

    /// Fails on any key outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        let allowed: Vec<String> = allowed.iter().map(|k| normalize(k)).collect();
        match self.values.keys().find(|k| !allowed.contains(k)) {
            Some(k) => Err(Error::Config(format!("unknown configuration key {k:?}"))),
            None => Ok(()),
        }
    }

    pub fn merge(&mut self, other: &KvConfig) {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_scalars_and_normalizes_keys() {
        let cfg = KvConfig::parse("max_depth = 10\nlearning-rate = 0.1\nscale = true\ndata = \"a.csv\"\n").unwrap();
        assert_eq!(cfg.parse_opt::<usize>("max-depth").unwrap(), Some(10));
        assert_eq!(cfg.parse_opt::<f64>("learning_rate").unwrap(), Some(0.1));
        assert_eq!(cfg.parse_opt::<bool>("scale").unwrap(), Some(true));
        assert_eq!(cfg.get("data"), Some("a.csv"));
        assert_eq!(cfg.parse_or("seed", 7u64).unwrap(), 7);
    }

    #[test]
    fn rejects_tables_unknown_keys_and_bad_values() {
        assert!(KvConfig::parse("[section]\na = 1\n").is_err());
        assert!(KvConfig::parse("not toml at all ===").is_err());
        let cfg = KvConfig::parse("bogus = 1\n").unwrap();
        assert!(cfg.check_keys(&["seed"]).is_err());
        let cfg = KvConfig::parse("seed = \"abc\"\n").unwrap();
        assert!(cfg.parse_opt::<u64>("seed").is_err());
    }

    #[test]
    fn later_values_override() {
        let mut base = KvConfig::parse("seed = 1\nsubsets = 5\n").unwrap();
        let mut flags = KvConfig::new();
        flags.set("seed", "9");
        base.merge(&flags);
        assert_eq!(base.get("seed"), Some("9"));
        assert_eq!(base.get("subsets"), Some("5"));
    }
}
