use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

/// Flat `key = value` configuration with dotted keys.
///
/// Blank lines and lines starting with `#` are ignored, as is anything after
/// a `#` preceded by whitespace. Repeated keys are an error.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

fn is_valid_key(key: &str) -> bool {
    !key.is_empty()
        && key.split('.').all(|seg| {
            !seg.is_empty() && seg.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        })
}

/// Cuts a value at a `#` that starts it or follows whitespace.
fn strip_comment(value: &str) -> &str {
    let value = value.trim_start();
    let bytes = value.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        if b == b'#' && (i == 0 || bytes[i - 1].is_ascii_whitespace()) {
            return &value[..i];
        }
    }
    value
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(Error::Config { line, message: format!("expected `key = value`, got `{content}`") });
            };
            let (key, value) = (key.trim(), strip_comment(value).trim());
            if !is_valid_key(key) {
                return Err(Error::Config { line, message: format!("invalid key `{key}`") });
            }
            if value.is_empty() {
                return Err(Error::Config { line, message: format!("empty value for `{key}`") });
            }
            if entries.insert(key.to_string(), value.to_string()).is_some() {
                return Err(Error::Config { line, message: format!("duplicate key `{key}`") });
            }
        }
        Ok(Self { entries })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Inserts or replaces a value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !is_valid_key(key) {
            return Err(Error::Config { line: 0, message: format!("invalid key `{key}`") });
        }
        self.entries.insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Parses the value at `key` if present.
    pub fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Error::Config { line: 0, message: format!("bad value `{v}` for `{key}`: {e}") })
            })
            .transpose()
    }
}

/// Parses `key=value` as given to `--param`.
pub fn parse_param_override(s: &str) -> Result<(String, String)> {
    let bad = |message: String| Error::Config { line: 0, message };
    let (key, value) = s.split_once('=').ok_or_else(|| bad(format!("expected key=value, got `{s}`")))?;
    let (key, value) = (key.trim(), value.trim());
    if !is_valid_key(key) {
        return Err(bad(format!("invalid key `{key}`")));
    }
    if value.is_empty() {
        return Err(bad(format!("empty value for `{key}`")));
    }
    Ok((key.to_string(), value.to_string()))
}

/// Comma separated finite reals.
pub fn parse_vector(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|item| {
            let item = item.trim();
            match item.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(Error::Config { line: 0, message: format!("`{item}` is not a finite number") }),
            }
        })
        .collect()
}

/// Comma separated positive step sizes, as given to `--h-list`.
pub fn parse_h_list(s: &str) -> Result<Vec<f64>> {
    let list = parse_vector(s)?;
    if let Some(h) = list.iter().find(|h| **h <= 0.0) {
        return Err(Error::Config { line: 0, message: format!("step sizes must be positive, got {h}") });
    }
    Ok(list)
}
