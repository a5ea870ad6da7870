//! Flat key-value configuration files with `[section]` headers.
//!
//! Syntax: `key = value` lines grouped under `[section]` headers; `#` and
//! `;` start comments. Errors carry the `section.key` path.

use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub type ConfigResult<T> = Result<T, ConfigError>;

#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> ConfigResult<Self> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current = String::new();
        for (line_no, raw) in text.lines().enumerate() {
            let line = match raw.find(['#', ';']) {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                if !line.ends_with(']') || line.len() < 3 {
                    return Err(ConfigError(format!(
                        "line {}: malformed section header {line:?}",
                        line_no + 1
                    )));
                }
                current = line[1..line.len() - 1].trim().to_string();
                sections.entry(current.clone()).or_default();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError(format!(
                    "line {}: expected `key = value`, got {line:?}",
                    line_no + 1
                )));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(ConfigError(format!("line {}: empty key", line_no + 1)));
            }
            let section = sections.entry(current.clone()).or_default();
            if section.insert(key.clone(), value).is_some() {
                return Err(ConfigError(format!("{current}.{key}: duplicate key")));
            }
        }
        Ok(ConfigFile { sections })
    }

    pub fn from_path(path: &Path) -> ConfigResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn section(&self, name: &str) -> Section<'_> {
        Section {
            name: name.to_string(),
            map: self.sections.get(name),
        }
    }

    pub fn section_names(&self) -> impl Iterator<Item = &str> {
        self.sections.keys().map(String::as_str)
    }
}

/// Typed accessor over one section; missing sections behave as empty.
pub struct Section<'a> {
    name: String,
    map: Option<&'a BTreeMap<String, String>>,
}

impl<'a> Section<'a> {
    fn raw(&self, key: &str) -> Option<&'a str> {
        self.map.and_then(|m| m.get(key)).map(String::as_str)
    }

    fn path(&self, key: &str) -> String {
        format!("{}.{key}", self.name)
    }

    pub fn keys(&self) -> Vec<&'a str> {
        self.map
            .map(|m| m.keys().map(String::as_str).collect())
            .unwrap_or_default()
    }

    pub fn str_or(&self, key: &str, default: &str) -> String {
        self.raw(key).unwrap_or(default).to_string()
    }

    pub fn get_str(&self, key: &str) -> Option<String> {
        self.raw(key).map(str::to_string)
    }

    pub fn f64_or(&self, key: &str, default: f64) -> ConfigResult<f64> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| {
                ConfigError(format!("{}: expected a number, got {v:?}", self.path(key)))
            }),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> ConfigResult<usize> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| {
                ConfigError(format!(
                    "{}: expected an integer, got {v:?}",
                    self.path(key)
                ))
            }),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> ConfigResult<bool> {
        match self.raw(key) {
            None => Ok(default),
            Some("true") | Some("1") | Some("yes") => Ok(true),
            Some("false") | Some("0") | Some("no") => Ok(false),
            Some(v) => Err(ConfigError(format!(
                "{}: expected a boolean, got {v:?}",
                self.path(key)
            ))),
        }
    }

    /// Comma-separated list; the default is used when the key is absent.
    pub fn list_or(&self, key: &str, default: &[&str]) -> Vec<String> {
        match self.raw(key) {
            None => default.iter().map(|s| s.to_string()).collect(),
            Some(v) => v
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect(),
        }
    }

    pub fn f64_list_or(&self, key: &str, default: &[f64]) -> ConfigResult<Vec<f64>> {
        match self.raw(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse().map_err(|_| {
                        ConfigError(format!("{}: expected numbers, got {s:?}", self.path(key)))
                    })
                })
                .collect(),
        }
    }

    pub fn usize_list_or(&self, key: &str, default: &[usize]) -> ConfigResult<Vec<usize>> {
        match self.raw(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse().map_err(|_| {
                        ConfigError(format!("{}: expected integers, got {s:?}", self.path(key)))
                    })
                })
                .collect(),
        }
    }

    pub fn err(&self, key: &str, message: &str) -> ConfigError {
        ConfigError(format!("{}: {message}", self.path(key)))
    }
}
