//! `key = value` configuration files merged with command-line overrides.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::{CliError, Result};

/// Parsed configuration file. Keys are normalized to `snake_case`.
#[derive(Debug, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, (u64, String)>,
    source: String,
}

fn normalize(key: &str) -> String {
    key.trim().replace('-', "_")
}

impl ConfigFile {
    pub fn load(path: Option<&Path>, known: &[&str]) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i as u64 + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let ingest = |msg: String| CliError::Ingest {
                path: path.to_path_buf(),
                line: line_no,
                msg,
            };
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ingest(format!("expected key = value, got '{line}'")))?;
            let key = normalize(k);
            if !known.contains(&key.as_str()) {
                return Err(CliError::usage(format!(
                    "{}:{line_no}: unknown key '{key}' (known: {})",
                    path.display(),
                    known.join(", ")
                )));
            }
            if values.insert(key.clone(), (line_no, v.trim().to_string())).is_some() {
                return Err(ingest(format!("duplicate key '{key}'")));
            }
        }
        Ok(Self {
            values,
            source: path.display().to_string(),
        })
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some((line, v)) => v.parse().map(Some).map_err(|e| {
                CliError::usage(format!("{}:{line}: bad value for '{key}': {e}", self.source))
            }),
        }
    }
}

/// Resolves each setting from flag, then file, then default, and records the
/// final value for the output manifest.
pub struct Settings {
    file: ConfigFile,
    resolved: BTreeMap<String, String>,
}

impl Settings {
    pub fn new(file: ConfigFile) -> Self {
        Self {
            file,
            resolved: BTreeMap::new(),
        }
    }

    pub fn opt<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let v = match flag {
            Some(v) => Some(v),
            None => self.file.parse(key)?,
        };
        if let Some(v) = &v {
            self.resolved.insert(key.to_string(), v.to_string());
        }
        Ok(v)
    }

    pub fn get<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let v = self.opt(key, flag)?.unwrap_or(default);
        self.resolved.insert(key.to_string(), v.to_string());
        Ok(v)
    }

    pub fn require<T>(&mut self, key: &str, flag: Option<T>) -> Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        self.opt(key, flag)?
            .ok_or_else(|| CliError::usage(format!("missing required setting '{key}'")))
    }

    pub fn into_resolved(self) -> BTreeMap<String, String> {
        self.resolved
    }
}

/// Bootstrap dataset size: a literal count, or `N` for the size of whatever
/// dataset the run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MSpec {
    DataSize,
    Count(usize),
}

impl MSpec {
    pub fn resolve(self, n: usize) -> usize {
        match self {
            MSpec::DataSize => n,
            MSpec::Count(m) => m,
        }
    }
}

impl FromStr for MSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if s == "N" {
            return Ok(MSpec::DataSize);
        }
        match s.parse::<usize>() {
            Ok(0) => Err("M must be at least 1".into()),
            Ok(m) => Ok(MSpec::Count(m)),
            Err(_) => Err(format!("expected a positive integer or N, got '{s}'")),
        }
    }
}

impl Display for MSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MSpec::DataSize => write!(f, "N"),
            MSpec::Count(m) => write!(f, "{m}"),
        }
    }
}

/// A numeric grid written either as `start:stop:step` or as a comma list.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}"));
        let parts: Vec<&str> = s.split(':').collect();
        let values = match parts.as_slice() {
            [a, b, step] => {
                let (a, b, step) = (num(a)?, num(b)?, num(step)?);
                if step.is_nan() || step <= 0.0 || b < a {
                    return Err(format!("bad range '{s}': need start <= stop and step > 0"));
                }
                let n = ((b - a) / step + 1e-9).floor() as usize;
                if n > 100_000 {
                    return Err(format!("range '{s}' has more than 100000 points"));
                }
                (0..=n).map(|i| a + i as f64 * step).collect()
            }
            [list] => list.split(',').map(num).collect::<std::result::Result<Vec<_>, _>>()?,
            _ => return Err(format!("expected start:stop:step or a comma list, got '{s}'")),
        };
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(format!("grid '{s}' must be non-empty and finite"));
        }
        Ok(Grid(values))
    }
}

impl Display for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}
