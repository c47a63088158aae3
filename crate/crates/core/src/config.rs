//! Experiment configuration: per-command defaults, an INI-like file, then flags.
//!
//! The config file is flat `key = value` text. Keys outside any section apply to every
//! command; keys under `[landscape]`, `[batch]`, ... apply to that command only and win over
//! the global ones. Flags given on the command line win over both.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::Ini;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Fully resolved settings for one command.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExperimentConfig {
    pub command: String,
    pub values: BTreeMap<String, String>,
}

impl ExperimentConfig {
    /// Merges `defaults`, then the file at `path` (if any), then `overrides`. Keys that are not
    /// among the defaults are rejected.
    pub fn resolve(
        command: &str,
        defaults: &[(&str, &str)],
        path: Option<&Path>,
        overrides: &BTreeMap<String, String>,
    ) -> Result<Self> {
        let mut values: BTreeMap<String, String> =
            defaults.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        if let Some(path) = path {
            let ini = Ini::load_from_file(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            for section in [None, Some(command)] {
                if let Some(props) = ini.section(section) {
                    for (k, v) in props.iter() {
                        set(&mut values, command, k, v)?;
                    }
                }
            }
        }
        for (k, v) in overrides {
            set(&mut values, command, k, v)?;
        }
        Ok(Self { command: command.to_string(), values })
    }

    pub fn raw(&self, key: &str) -> Result<&str> {
        self.values
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::Config(format!("missing key '{key}'")))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.raw(key)?;
        raw.trim().parse().map_err(|e| Error::Config(format!("bad value '{raw}' for '{key}': {e}")))
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.raw(key)?;
        raw.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|e| Error::Config(format!("bad item '{s}' in '{key}': {e}"))))
            .collect()
    }

    pub fn flag(&self, key: &str) -> Result<bool> {
        match self.raw(key)?.trim().to_ascii_lowercase().as_str() {
            "true" | "yes" | "on" | "1" => Ok(true),
            "false" | "no" | "off" | "0" => Ok(false),
            other => Err(Error::Config(format!("bad boolean '{other}' for '{key}'"))),
        }
    }

    /// Optional path; empty means unset.
    pub fn path(&self, key: &str) -> Result<Option<PathBuf>> {
        let raw = self.raw(key)?.trim();
        Ok((!raw.is_empty()).then(|| PathBuf::from(raw)))
    }

    pub fn seed(&self) -> Result<u64> {
        self.get("seed")
    }

    fn canonical(&self) -> String {
        let mut s = format!("command={}\n", self.command);
        for (k, v) in &self.values {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }

    /// SHA-256 of the canonical `key=value` listing.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// `#`-prefixed metadata lines for output files.
    pub fn header(&self) -> Result<String> {
        let mut s = String::new();
        let _ = writeln!(s, "# maxent-tomo {VERSION}");
        let _ = writeln!(s, "# command: {}", self.command);
        let _ = writeln!(s, "# seed: {}", self.seed()?);
        let _ = writeln!(s, "# config-sha256: {}", self.hash());
        for (k, v) in &self.values {
            let _ = writeln!(s, "# {k} = {v}");
        }
        Ok(s)
    }
}

fn set(values: &mut BTreeMap<String, String>, command: &str, key: &str, value: &str) -> Result<()> {
    let key = key.trim().to_ascii_lowercase().replace('_', "-");
    match values.get_mut(&key) {
        Some(slot) => {
            *slot = value.trim().to_string();
            Ok(())
        }
        None => Err(Error::Config(format!("unknown key '{key}' for command '{command}'"))),
    }
}

/// Parses `min:max:step`.
pub fn parse_grid(raw: &str) -> Result<(f64, f64, f64)> {
    let parts: Vec<&str> = raw.split(':').map(str::trim).collect();
    let bad = || Error::Config(format!("grid must be 'min:max:step', got '{raw}'"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let nums: Vec<f64> = parts.iter().map(|p| p.parse().map_err(|_| bad())).collect::<Result<_>>()?;
    Ok((nums[0], nums[1], nums[2]))
}

/// How many integration steps a run of total time `T` gets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepsRule {
    /// `ceil(rate · T)` steps, at least one.
    PerUnit(f64),
    /// `T²` steps, i.e. `δt = 1/T`.
    Square,
    /// The same number of steps for every `T`.
    Fixed(usize),
}

impl StepsRule {
    pub fn steps(&self, total_time: f64) -> usize {
        match *self {
            StepsRule::PerUnit(rate) => ((rate * total_time).ceil() as usize).max(1),
            StepsRule::Square => ((total_time * total_time).round() as usize).max(1),
            StepsRule::Fixed(n) => n,
        }
    }
}

impl FromStr for StepsRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Config(format!("steps rule must be 'per-unit:R', 'square' or 'fixed:N', got '{s}'"));
        if s == "square" {
            return Ok(StepsRule::Square);
        }
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "per-unit" => {
                let r: f64 = arg.parse().map_err(|_| bad())?;
                if !(r > 0.0 && r.is_finite()) {
                    return Err(bad());
                }
                Ok(StepsRule::PerUnit(r))
            }
            "fixed" => match arg.parse() {
                Ok(n) if n > 0 => Ok(StepsRule::Fixed(n)),
                _ => Err(bad()),
            },
            _ => Err(bad()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    const DEFAULTS: &[(&str, &str)] = &[("seed", "0"), ("alpha", "100"), ("bits", "12")];

    fn overrides(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn precedence_is_defaults_file_section_flags() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "alpha = 5\nbits = 8\n[batch]\nbits = 6").unwrap();
        let cfg = ExperimentConfig::resolve("batch", DEFAULTS, Some(f.path()), &overrides(&[("seed", "9")])).unwrap();
        assert_eq!(cfg.get::<f64>("alpha").unwrap(), 5.0);
        assert_eq!(cfg.get::<u32>("bits").unwrap(), 6);
        assert_eq!(cfg.seed().unwrap(), 9);
        let other = ExperimentConfig::resolve("landscape", DEFAULTS, Some(f.path()), &BTreeMap::new()).unwrap();
        assert_eq!(other.get::<u32>("bits").unwrap(), 8);
    }

    #[test]
    fn unknown_and_malformed_values() {
        let r = ExperimentConfig::resolve("batch", DEFAULTS, None, &overrides(&[("nope", "1")]));
        assert!(matches!(r, Err(Error::Config(_))));
        let cfg = ExperimentConfig::resolve("batch", DEFAULTS, None, &overrides(&[("alpha", "abc")])).unwrap();
        assert!(cfg.get::<f64>("alpha").is_err());
        assert!(ExperimentConfig::resolve("batch", DEFAULTS, Some(Path::new("/nonexistent/x.ini")), &BTreeMap::new())
            .is_err());
    }

    #[test]
    fn hash_tracks_values() {
        let a = ExperimentConfig::resolve("batch", DEFAULTS, None, &BTreeMap::new()).unwrap();
        let b = ExperimentConfig::resolve("batch", DEFAULTS, None, &overrides(&[("alpha", "1")])).unwrap();
        assert_eq!(a.hash(), a.clone().hash());
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        let header = a.header().unwrap();
        assert!(header.lines().all(|l| l.starts_with('#')));
        assert!(header.contains(&a.hash()));
    }

    #[test]
    fn grid_and_steps_parsing() {
        assert_eq!(parse_grid("-3:3:0.05").unwrap(), (-3.0, 3.0, 0.05));
        assert!(parse_grid("1:2").is_err());
        assert_eq!("square".parse::<StepsRule>().unwrap().steps(8.0), 64);
        assert_eq!("per-unit:20".parse::<StepsRule>().unwrap().steps(0.5), 10);
        assert_eq!("fixed:7".parse::<StepsRule>().unwrap().steps(100.0), 7);
        assert!("fixed:0".parse::<StepsRule>().is_err());
        assert!("linear".parse::<StepsRule>().is_err());
    }
}
