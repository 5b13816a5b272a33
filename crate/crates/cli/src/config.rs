//! `key = value` configuration files. Keys are the long flag names; `_`
//! and `-` are interchangeable; `#` starts a comment.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::CliError;

pub const KNOWN_KEYS: &[&str] = &[
    "alpha",
    "beta",
    "gamma",
    "delta",
    "lambda",
    "mu",
    "seed",
    "format",
    "out",
    "rel-tol",
    "abs-tol",
    "max-step",
    "initial-step",
    "epsilon-fraction",
    "corner-handoff-time",
    "oracle-step",
    "x0",
    "y0",
    "t-end",
    "dt-out",
    "grid",
    "r-max",
    "per-run-dir",
    "index",
    "random-coeffs",
];

#[derive(Debug, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| {
            CliError::invalid(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::invalid(format!(
                    "config line {}: expected key = value",
                    n + 1
                )));
            };
            let key = key.trim().replace('_', "-");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::invalid(format!(
                    "config line {}: unknown key '{key}'",
                    n + 1
                )));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Self { values })
    }

    /// Fills `slot` from the file unless the command line already set it.
    pub fn fill<T: FromStr>(&self, slot: &mut Option<T>, key: &str) -> Result<(), CliError> {
        if slot.is_some() {
            return Ok(());
        }
        if let Some(raw) = self.values.get(key) {
            let parsed = raw.parse().map_err(|_| {
                CliError::invalid(format!("config key '{key}': cannot parse '{raw}'"))
            })?;
            *slot = Some(parsed);
        }
        Ok(())
    }
}
