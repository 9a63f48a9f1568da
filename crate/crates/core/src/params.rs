//! Flat `key = value` parameter files with `#` comments.
//!
//! Every diagnostic names the key and, when it came from a file, the line.

use std::fmt;
use std::path::Path;

use thiserror::Error;

/// Where a value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Line(usize),
    /// Supplied on the command line rather than in a file.
    Override,
    /// Absent from the input altogether.
    Nowhere,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Line(n) => write!(f, "line {n}"),
            Location::Override => f.write_str("override"),
            Location::Nowhere => f.write_str("input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{at}: expected `key = value`, found `{text}`")]
    Malformed { at: Location, text: String },
    #[error("{at}: duplicate key `{key}`")]
    Duplicate { at: Location, key: String },
    #[error("{at}: unknown key `{key}`")]
    UnknownKey { at: Location, key: String },
    #[error("missing required key `{key}`")]
    MissingKey { key: String },
    #[error("{at}: key `{key}`: cannot parse `{value}` as {expected}")]
    BadValue {
        at: Location,
        key: String,
        value: String,
        expected: &'static str,
    },
    #[error("{at}: key `{key}`: {reason}")]
    OutOfRange {
        at: Location,
        key: String,
        reason: String,
    },
    #[error("cannot read `{path}`: {reason}")]
    Unreadable { path: String, reason: String },
}

impl ConfigError {
    /// The key the diagnostic is about, if any.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Duplicate { key, .. }
            | ConfigError::UnknownKey { key, .. }
            | ConfigError::MissingKey { key }
            | ConfigError::BadValue { key, .. }
            | ConfigError::OutOfRange { key, .. } => Some(key),
            ConfigError::Malformed { .. } | ConfigError::Unreadable { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    key: String,
    value: String,
    at: Location,
    used: bool,
}

/// Parsed key=value pairs. Getters mark keys as consumed so that
/// [`Params::finish`] can reject anything left over.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Params {
    entries: Vec<Entry>,
}

impl Params {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut params = Params::default();
        for (i, raw) in text.lines().enumerate() {
            let at = Location::Line(i + 1);
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Malformed {
                    at,
                    text: raw.trim().to_string(),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || key.contains(char::is_whitespace) || value.is_empty() {
                return Err(ConfigError::Malformed {
                    at,
                    text: raw.trim().to_string(),
                });
            }
            if params.find(key).is_some() {
                return Err(ConfigError::Duplicate {
                    at,
                    key: key.to_string(),
                });
            }
            params.entries.push(Entry {
                key: key.into(),
                value: value.into(),
                at,
                used: false,
            });
        }
        Ok(params)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Unreadable {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::parse(&text)
    }

    /// Applies a `key=value` override, replacing any value from the file.
    pub fn set_override(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let malformed = || ConfigError::Malformed {
            at: Location::Override,
            text: assignment.to_string(),
        };
        let (key, value) = assignment.split_once('=').ok_or_else(malformed)?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(malformed());
        }
        self.entries.retain(|e| e.key != key);
        self.entries.push(Entry {
            key: key.into(),
            value: value.into(),
            at: Location::Override,
            used: false,
        });
        Ok(())
    }

    fn find(&self, key: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.key == key)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.find(key).is_some()
    }

    /// Raw string value and its location.
    pub fn take_str(&mut self, key: &str) -> Option<(String, Location)> {
        let i = self.find(key)?;
        let e = &mut self.entries[i];
        e.used = true;
        Some((e.value.clone(), e.at))
    }

    pub fn take_f64(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        let Some((value, at)) = self.take_str(key) else {
            return Ok(None);
        };
        match value.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Some(v)),
            _ => Err(ConfigError::BadValue {
                at,
                key: key.into(),
                value,
                expected: "a finite number",
            }),
        }
    }

    pub fn require_f64(&mut self, key: &str) -> Result<f64, ConfigError> {
        self.take_f64(key)?
            .ok_or_else(|| ConfigError::MissingKey { key: key.into() })
    }

    pub fn take_u64(&mut self, key: &str) -> Result<Option<u64>, ConfigError> {
        let Some((value, at)) = self.take_str(key) else {
            return Ok(None);
        };
        // Accept 1e5-style counts as long as they are whole numbers.
        let parsed = value.parse::<u64>().ok().or_else(|| {
            value
                .parse::<f64>()
                .ok()
                .filter(|v| v.fract() == 0.0 && *v >= 0.0 && *v < 1.8e19)
                .map(|v| v as u64)
        });
        parsed.map(Some).ok_or(ConfigError::BadValue {
            at,
            key: key.into(),
            value,
            expected: "a non-negative integer",
        })
    }

    /// A list given either as `a, b, c` or as `lin(start, stop, count)`
    /// (inclusive, evenly spaced).
    pub fn take_list(&mut self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        let Some((value, at)) = self.take_str(key) else {
            return Ok(None);
        };
        parse_list(&value).map(Some).ok_or(ConfigError::BadValue {
            at,
            key: key.into(),
            value,
            expected: "a list `a, b, ...` or `lin(start, stop, count)`",
        })
    }

    /// Location of `key`, for range-check diagnostics raised by callers.
    pub fn location(&self, key: &str) -> Location {
        self.find(key)
            .map_or(Location::Nowhere, |i| self.entries[i].at)
    }

    pub fn out_of_range(&self, key: &str, reason: impl Into<String>) -> ConfigError {
        ConfigError::OutOfRange {
            at: self.location(key),
            key: key.into(),
            reason: reason.into(),
        }
    }

    /// Fails on the first key (in input order) that no getter consumed.
    pub fn finish(&self) -> Result<(), ConfigError> {
        match self.entries.iter().find(|e| !e.used) {
            Some(e) => Err(ConfigError::UnknownKey {
                at: e.at,
                key: e.key.clone(),
            }),
            None => Ok(()),
        }
    }
}

fn parse_list(text: &str) -> Option<Vec<f64>> {
    let number = |t: &str| t.trim().parse::<f64>().ok().filter(|v| v.is_finite());
    if let Some(inner) = text
        .trim()
        .strip_prefix("lin(")
        .and_then(|r| r.strip_suffix(')'))
    {
        let parts: Vec<&str> = inner.split(',').collect();
        let [a, b, n] = parts.as_slice() else {
            return None;
        };
        let count: usize = n.trim().parse().ok()?;
        return Some(crate::pointer::linspace(number(a)?, number(b)?, count));
    }
    text.split(',').map(number).collect()
}
