//! `key = value` run configuration: an optional plain-text file merged
//! under command-line flags (flags win).

use crate::error::{Error, Result};
use crate::units::Unit;
use std::collections::BTreeMap;
use std::path::Path;

/// Settings for one command, collected from a config file and flags.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

impl RunConfig {
    /// Parse `key = value` lines; `#` starts a comment, blank lines are
    /// ignored. Every key must appear in `allowed`, otherwise the offending
    /// key is named in the error.
    pub fn from_file(path: &Path, allowed: &[&str]) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        Self::from_str_checked(&text, allowed)
    }

    pub fn from_str_checked(text: &str, allowed: &[&str]) -> Result<RunConfig> {
        let mut values = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: idx + 1,
                msg: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            if !allowed.contains(&key) {
                return Err(Error::Config(format!("unknown config key `{key}`")));
            }
            values.insert(key.to_string(), value.to_string());
        }
        Ok(RunConfig { values })
    }

    /// Overlay a flag value; flags override file values.
    pub fn set_flag(&mut self, key: &str, value: Option<String>) {
        if let Some(v) = value {
            self.values.insert(key.to_string(), v);
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("key `{key}`: cannot parse `{v}` as a number"))),
        }
    }

    pub fn get_u64(&self, key: &str) -> Result<Option<u64>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("key `{key}`: cannot parse `{v}` as an integer"))),
        }
    }

    /// Value with an optional unit suffix, converted to base units and
    /// checked against the expected dimension (e.g. `1.58us`, `24.6kHz`).
    pub fn get_quantity(&self, key: &str, dimension: crate::units::Dimension) -> Result<Option<f64>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => parse_quantity(v, dimension)
                .map(Some)
                .map_err(|e| Error::Config(format!("key `{key}`: {e}"))),
        }
    }
}

/// Split a literal like `1.58us` or `24.6 kHz` into number and unit tag and
/// convert to base units. A bare number is taken as already being in base
/// units. The tag must match the expected dimension.
pub fn parse_quantity(text: &str, dimension: crate::units::Dimension) -> Result<f64> {
    let text = text.trim();
    let split = text
        .char_indices()
        .take_while(|(_, c)| {
            c.is_ascii_digit() || matches!(c, '.' | '+' | '-' | 'e' | 'E')
        })
        .map(|(i, c)| i + c.len_utf8())
        .last()
        .unwrap_or(0);
    let (num, tag) = text.split_at(split);
    let num = num.trim();
    let tag = tag.trim();
    let value: f64 = num
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse number in `{text}`")))?;
    if tag.is_empty() {
        return Ok(value);
    }
    let unit: Unit = tag.parse()?;
    if unit.dimension() != dimension {
        return Err(Error::Config(format!(
            "unit `{tag}` has the wrong dimension for this flag"
        )));
    }
    Ok(unit.to_base(value))
}

/// Stark-slope literal: `24.6kHzcm/V`, `2.46e4Hzcm/V`, or a bare number in
/// Hz·cm/V.
pub fn parse_slope(text: &str) -> Result<f64> {
    let text = text.trim();
    for (suffix, factor) in [("MHzcm/V", 1e6), ("kHzcm/V", 1e3), ("Hzcm/V", 1.0)] {
        if let Some(num) = text.strip_suffix(suffix) {
            let value: f64 = num.trim().parse().map_err(|_| {
                Error::Config(format!("cannot parse number in `{text}`"))
            })?;
            return Ok(value * factor);
        }
    }
    text.parse()
        .map_err(|_| Error::Config(format!("cannot parse slope `{text}` (use e.g. 24.6kHzcm/V)")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::Dimension;

    #[test]
    fn file_parse_and_flag_override() {
        let text = "model = mims\n# comment\nseed = 7  # trailing\n";
        let mut cfg = RunConfig::from_str_checked(text, &["model", "seed", "out"]).unwrap();
        assert_eq!(cfg.get("model"), Some("mims"));
        assert_eq!(cfg.get_u64("seed").unwrap(), Some(7));
        cfg.set_flag("model", Some("hole-decay".to_string()));
        assert_eq!(cfg.get("model"), Some("hole-decay"));
        cfg.set_flag("seed", None);
        assert_eq!(cfg.get_u64("seed").unwrap(), Some(7));
    }

    #[test]
    fn unknown_key_is_named() {
        let err = RunConfig::from_str_checked("modle = mims\n", &["model"]).unwrap_err();
        assert!(err.to_string().contains("modle"));
    }

    #[test]
    fn quantities_with_units() {
        assert_eq!(parse_quantity("1.58us", Dimension::Time).unwrap(), 1.58e-6);
        assert_eq!(parse_quantity("2.4ms", Dimension::Time).unwrap(), 2.4e-3);
        assert_eq!(parse_quantity("3MHz", Dimension::Frequency).unwrap(), 3e6);
        assert_eq!(
            parse_quantity("100V/mm", Dimension::ElectricField).unwrap(),
            1000.0
        );
        assert_eq!(parse_quantity("0.5", Dimension::Time).unwrap(), 0.5);
        // wrong dimension rejected
        assert!(parse_quantity("3MHz", Dimension::Time).is_err());
        assert!(parse_quantity("1.58zs", Dimension::Time).is_err());
    }

    #[test]
    fn slope_literals() {
        assert_eq!(parse_slope("24.6kHzcm/V").unwrap(), 24.6e3);
        assert_eq!(parse_slope("1MHzcm/V").unwrap(), 1e6);
        assert_eq!(parse_slope("-24600").unwrap(), -24600.0);
        assert!(parse_slope("24.6 volts").is_err());
    }
}
