//! Flat `key = value` settings files and their merge with command-line
//! flags. Flags win over the file, the file wins over built-in defaults.

use crate::error::CliError;
use std::collections::BTreeMap;
use std::path::Path;

/// Keys accepted in a settings file.
pub const KEYS: &[&str] = &[
    "lambda",
    "vmax",
    "k",
    "label_stride",
    "max_cycles",
    "init",
    "ssim",
    "order",
    "seed",
    "noise",
    "method",
    "methods",
    "levels",
    "crop",
    "factor",
];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    /// Parses `key = value` lines. `#` starts a comment; dashes in keys are
    /// read as underscores.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(CliError::Usage(format!(
                    "config line {}: expected key = value, got '{line}'",
                    i + 1
                )));
            };
            let key = k.trim().replace('-', "_");
            if !KEYS.contains(&key.as_str()) {
                return Err(CliError::Usage(format!(
                    "config line {}: unknown key '{key}'",
                    i + 1
                )));
            }
            values.insert(key, v.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Parsed value of `key`, if present.
    pub fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| CliError::Usage(format!("config key {key}: '{v}': {e}")))
            })
            .transpose()
    }
}
