//! Flat `key = value` experiment configs with command-line overrides.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("config line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("missing required key `{0}`")]
    Missing(String),
    #[error("key `{key}`: cannot parse `{value}`: {message}")]
    Value {
        key: String,
        value: String,
        message: String,
    },
    #[error("override `{0}` has no value")]
    DanglingOverride(String),
}

/// Keys a subcommand accepts. An entry ending in `_` is a prefix that takes
/// a numeric suffix (`mass_0`, `potential_1`, ...).
pub struct Schema {
    pub keys: &'static [&'static str],
    pub required: &'static [&'static str],
    pub defaults: &'static [(&'static str, &'static str)],
}

impl Schema {
    fn allows(&self, key: &str) -> bool {
        self.keys.iter().any(|k| match k.strip_suffix('_') {
            Some(prefix) => key
                .strip_prefix(prefix)
                .and_then(|r| r.strip_prefix('_'))
                .is_some_and(|n| !n.is_empty() && n.bytes().all(|b| b.is_ascii_digit())),
            None => *k == key,
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
}

pub fn parse_text(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: k + 1,
                message: format!("expected `key = value`, got `{line}`"),
            });
        };
        let key = key.trim();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(ConfigError::Syntax {
                line: k + 1,
                message: format!("invalid key `{key}`"),
            });
        }
        out.push((key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

/// `["--alpha", "2", "--beta", "0.1"]` to pairs.
pub fn parse_overrides(args: &[String]) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(flag) = it.next() {
        let Some(key) = flag.strip_prefix("--") else {
            return Err(ConfigError::UnknownKey(flag.clone()));
        };
        if let Some((k, v)) = key.split_once('=') {
            out.push((k.to_string(), v.to_string()));
            continue;
        }
        let value = it.next().ok_or_else(|| ConfigError::DanglingOverride(flag.clone()))?;
        out.push((key.to_string(), value.clone()));
    }
    Ok(out)
}

impl Config {
    /// Layers defaults, then the file, then overrides, and validates keys.
    pub fn resolve(
        schema: &Schema,
        file: Option<&Path>,
        overrides: Vec<(String, String)>,
    ) -> Result<Self, ConfigError> {
        let mut values: BTreeMap<String, String> = schema
            .defaults
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        let from_file = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
                parse_text(&text)?
            }
            None => Vec::new(),
        };
        for (k, v) in from_file.into_iter().chain(overrides) {
            if !schema.allows(&k) {
                return Err(ConfigError::UnknownKey(k));
            }
            values.insert(k, v);
        }
        if let Some(k) = schema.required.iter().find(|k| !values.contains_key(**k)) {
            return Err(ConfigError::Missing(k.to_string()));
        }
        Ok(Self { values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn str(&self, key: &str) -> Result<&str, ConfigError> {
        self.raw(key).ok_or_else(|| ConfigError::Missing(key.to_string()))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        let v = self.str(key)?;
        v.parse().map_err(|e: T::Err| ConfigError::Value {
            key: key.to_string(),
            value: v.to_string(),
            message: e.to_string(),
        })
    }

    pub fn opt<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key).map(|_| self.get(key)).transpose()
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        let v = self.str(key)?;
        v.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse().map_err(|e: T::Err| ConfigError::Value {
                    key: key.to_string(),
                    value: s.to_string(),
                    message: e.to_string(),
                })
            })
            .collect()
    }

    /// `# gapp <command> key=value ...` with every resolved key.
    pub fn header(&self, command: &str) -> String {
        let mut s = format!("# gapp {command}");
        for (k, v) in &self.values {
            s.push(' ');
            s.push_str(k);
            s.push('=');
            s.push_str(&v.replace(' ', ""));
        }
        s.push('\n');
        s
    }
}
