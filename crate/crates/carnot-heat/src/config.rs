//! Flat key-value experiment configuration: one `key = value` pair per line,
//! `#` comments, registry names resolved at run time.

use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    HeatContent,
    SmoothFunction,
    LowerBound,
    Perimeter,
    Subordinator,
    ExitBounds,
    TailChecks,
    Taylor,
    Mollification,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        ExperimentKind::HeatContent,
        ExperimentKind::SmoothFunction,
        ExperimentKind::LowerBound,
        ExperimentKind::Perimeter,
        ExperimentKind::Subordinator,
        ExperimentKind::ExitBounds,
        ExperimentKind::TailChecks,
        ExperimentKind::Taylor,
        ExperimentKind::Mollification,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::HeatContent => "heat-content",
            ExperimentKind::SmoothFunction => "smooth-function",
            ExperimentKind::LowerBound => "lower-bound",
            ExperimentKind::Perimeter => "perimeter",
            ExperimentKind::Subordinator => "subordinator",
            ExperimentKind::ExitBounds => "exit-bounds",
            ExperimentKind::TailChecks => "tail-checks",
            ExperimentKind::Taylor => "taylor",
            ExperimentKind::Mollification => "mollification",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::UnknownName(format!("experiment kind {s:?}")))
    }
}

/// Parsed experiment configuration. Kind-specific keys stay in `extra` and
/// are pulled by the experiment driver through the typed accessors.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub entries: BTreeMap<String, String>,
}

const KNOWN_COMMON: &[&str] = &["kind", "seed", "workers", "out"];

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value, got {raw:?}", lineno + 1)))?;
            let key = k.trim().to_string();
            let value = v.trim().to_string();
            if key.is_empty() || value.is_empty() {
                return Err(Error::Parse(format!("line {}: empty key or value", lineno + 1)));
            }
            if entries.insert(key.clone(), value).is_some() {
                return Err(Error::Parse(format!("line {}: duplicate key {key:?}", lineno + 1)));
            }
        }
        let kind: ExperimentKind = entries
            .get("kind")
            .ok_or_else(|| Error::Parse("missing key 'kind'".into()))?
            .parse()?;
        let cfg = Self { kind, entries };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    fn validate(&self) -> Result<()> {
        if let Some(a) = self.get_f64_opt("alpha")? {
            if !(a > 0.0 && a <= 2.0) {
                return Err(Error::InvalidParameter(format!("alpha must be in (0, 2], got {a}")));
            }
        }
        // a declared t-grid must be decreasing toward 0
        if self.entries.contains_key("t-start") {
            let _ = self.t_grid()?;
        }
        let _ = KNOWN_COMMON; // common keys have no further constraints
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: String) {
        self.entries.insert(key.to_string(), value);
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|s| s.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::Parse(format!("missing key {key:?}")))
    }

    pub fn get_f64(&self, key: &str) -> Result<f64> {
        parse_f64(key, self.require(key)?)
    }

    pub fn get_f64_opt(&self, key: &str) -> Result<Option<f64>> {
        self.get(key).map(|v| parse_f64(key, v)).transpose()
    }

    pub fn get_f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.get_f64_opt(key)?.unwrap_or(default))
    }

    pub fn get_usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Parse(format!("key {key:?}: expected an integer, got {v:?}"))),
        }
    }

    pub fn get_u64_or(&self, key: &str, default: u64) -> Result<u64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Parse(format!("key {key:?}: expected an integer, got {v:?}"))),
        }
    }

    /// Comma-separated float list.
    pub fn get_list(&self, key: &str) -> Result<Vec<f64>> {
        self.require(key)?
            .split(',')
            .map(|v| parse_f64(key, v.trim()))
            .collect()
    }

    pub fn get_list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        if self.entries.contains_key(key) {
            self.get_list(key)
        } else {
            Ok(default.to_vec())
        }
    }

    pub fn seed(&self) -> Result<u64> {
        self.get_u64_or("seed", 1)
    }

    pub fn workers(&self) -> Result<usize> {
        self.get_usize_or("workers", 0)
    }

    pub fn samples(&self) -> Result<usize> {
        self.get_usize_or("samples", 100_000)
    }

    pub fn grid(&self) -> Result<usize> {
        self.get_usize_or("grid", 512)
    }

    /// Geometric t-grid from t-start down to t-stop with t-count points.
    pub fn t_grid(&self) -> Result<Vec<f64>> {
        let start = self.get_f64("t-start")?;
        let stop = self.get_f64("t-stop")?;
        let count = self.get_usize_or("t-count", 5)?;
        if !(stop > 0.0 && start > stop) {
            return Err(Error::InvalidParameter(format!(
                "t-grid needs t-start > t-stop > 0, got {start} .. {stop}"
            )));
        }
        if count < 1 {
            return Err(Error::InvalidParameter("t-count must be at least 1".into()));
        }
        if count == 1 {
            return Ok(vec![start]);
        }
        let ratio = (stop / start).powf(1.0 / (count - 1) as f64);
        Ok((0..count).map(|k| start * ratio.powi(k as i32)).collect())
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.parse()
        .map_err(|_| Error::Parse(format!("key {key:?}: expected a number, got {v:?}")))
}
