//! `key = value` run configuration.
//!
//! One setting per line, `#` starts a comment. Command-line flags feed the same
//! table, so a flag is validated exactly like the config line it overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::spectrum::{BranchIndex, ChainParams, CouplingParams};
use crate::sweep::{AxisRange, CriticalAxis, InitialState, SweepSpec};

pub const KEYS: &[&str] = &[
    "command", "n_sites", "lambda", "gamma", "t", "g", "h", "omega_a", "omega_b", "initial", "workers", "seed",
    "output", "input", "bra", "ket", "axis", "cases", "method",
];

/// Where a setting came from, for error messages.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    Default,
    Line(usize),
    Flag,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub key: String,
    pub origin: Origin,
    pub message: String,
}

impl ConfigError {
    fn new(key: impl Into<String>, origin: Origin, message: impl Into<String>) -> Self {
        ConfigError { key: key.into(), origin, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.origin {
            Origin::Line(n) => write!(f, "line {n}: `{}`: {}", self.key, self.message),
            Origin::Flag => write!(f, "flag --{}: {}", self.key.replace('_', "-"), self.message),
            Origin::Default => write!(f, "`{}`: {}", self.key, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Gamma,
    Sweep,
    Fidelity,
    Validate,
    Detect,
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "gamma" => Ok(Command::Gamma),
            "sweep" => Ok(Command::Sweep),
            "fidelity" => Ok(Command::Fidelity),
            "validate" => Ok(Command::Validate),
            "detect" => Ok(Command::Detect),
            other => Err(format!("unknown command `{other}`")),
        }
    }
}

/// How `gamma` evaluates the tensor entry.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Method {
    #[default]
    Formula,
    Oracle,
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "formula" => Ok(Method::Formula),
            "oracle" => Ok(Method::Oracle),
            other => Err(format!("unknown method `{other}` (expected formula or oracle)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub n_sites: usize,
    pub lambda: AxisRange,
    pub gamma: AxisRange,
    pub time: AxisRange,
    pub coupling: CouplingParams,
    pub initial: InitialState,
    pub workers: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub bra: BranchIndex,
    pub ket: BranchIndex,
    pub axis: CriticalAxis,
    pub cases: usize,
    pub method: Method,
    origins: BTreeMap<&'static str, Origin>,
}

impl Default for RunConfig {
    /// `N = 1502`, `g = h = 0.05`, a `(γ, t)` surface at `λ = 0.8`.
    fn default() -> Self {
        RunConfig {
            command: None,
            n_sites: 1502,
            lambda: AxisRange::Fixed(0.8),
            gamma: AxisRange::Grid { min: 0.0, max: 1.0, points: 101 },
            time: AxisRange::Grid { min: 0.0, max: 4.0, points: 101 },
            coupling: CouplingParams { g: 0.05, h: 0.05, omega_a: 0.0, omega_b: 0.0 },
            initial: InitialState::PlusPlus,
            workers: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            seed: 0,
            output: None,
            input: None,
            bra: BranchIndex::B11,
            ket: BranchIndex::B00,
            axis: CriticalAxis::Lambda,
            cases: 100,
            method: Method::Formula,
            origins: BTreeMap::new(),
        }
    }
}

impl RunConfig {
    pub fn origin(&self, key: &str) -> Origin {
        self.origins.get(key).copied().unwrap_or(Origin::Default)
    }

    pub fn error(&self, key: &'static str, message: impl Into<String>) -> ConfigError {
        ConfigError::new(key, self.origin(key), message)
    }

    pub fn sweep_spec(&self) -> SweepSpec {
        SweepSpec {
            n_sites: self.n_sites,
            lambda: self.lambda,
            gamma: self.gamma,
            time: self.time,
            coupling: self.coupling,
            initial: self.initial,
            with_overlap: false,
        }
    }

    /// The scalar value of an axis that a single-point command needs pinned.
    pub fn fixed(&self, key: &'static str) -> Result<f64, ConfigError> {
        let axis = match key {
            "lambda" => self.lambda,
            "gamma" => self.gamma,
            "t" => self.time,
            _ => unreachable!("not an axis key: {key}"),
        };
        match axis {
            AxisRange::Fixed(v) => Ok(v),
            AxisRange::Grid { .. } => {
                Err(self.error(key, format!("must be a single value for this command, got {axis}")))
            }
        }
    }

    pub fn chain_point(&self) -> Result<ChainParams, ConfigError> {
        let (gamma, lambda) = (self.fixed("gamma")?, self.fixed("lambda")?);
        ChainParams::new(self.n_sites, gamma, lambda).map_err(|e| self.error("n_sites", e.to_string()))
    }
}

/// Raw settings before type conversion.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Settings {
    entries: BTreeMap<&'static str, (String, Origin)>,
}

fn known_key(key: &str) -> Option<&'static str> {
    KEYS.iter().copied().find(|k| *k == key)
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut out = Settings::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let origin = Origin::Line(line_no);
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::new(line, origin, "expected `key = value`"));
            };
            let (key, value) = (key.trim(), value.trim());
            let Some(key) = known_key(key) else {
                return Err(ConfigError::new(key, origin, "unknown key"));
            };
            if value.is_empty() {
                return Err(ConfigError::new(key, origin, "missing value"));
            }
            if let Some((_, Origin::Line(first))) = out.entries.get(key) {
                return Err(ConfigError::new(key, origin, format!("duplicate key (first set on line {first})")));
            }
            out.entries.insert(key, (value.to_string(), origin));
        }
        Ok(out)
    }

    /// Override from a command-line flag.
    pub fn set_flag(&mut self, key: &str, value: impl Into<String>) -> Result<(), ConfigError> {
        let key = known_key(key).ok_or_else(|| ConfigError::new(key, Origin::Flag, "unknown key"))?;
        self.entries.insert(key, (value.into(), Origin::Flag));
        Ok(())
    }

    pub fn build(&self) -> Result<RunConfig, ConfigError> {
        let mut cfg = RunConfig::default();
        for (&key, (value, origin)) in &self.entries {
            let origin = *origin;
            apply(&mut cfg, key, value).map_err(|msg| ConfigError::new(key, origin, msg))?;
            cfg.origins.insert(key, origin);
        }
        check(&cfg)?;
        Ok(cfg)
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    Settings::parse(text)?.build()
}

fn parse<T: FromStr>(value: &str, what: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("expected {what}, got `{value}`"))
}

fn finite(value: &str) -> Result<f64, String> {
    let v: f64 = parse(value, "a number")?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be finite, got `{value}`"))
    }
}

fn apply(cfg: &mut RunConfig, key: &str, value: &str) -> Result<(), String> {
    match key {
        "command" => cfg.command = Some(value.parse()?),
        "n_sites" => cfg.n_sites = parse(value, "a positive integer")?,
        "lambda" => cfg.lambda = value.parse()?,
        "gamma" => cfg.gamma = value.parse()?,
        "t" => cfg.time = value.parse()?,
        "g" => cfg.coupling.g = finite(value)?,
        "h" => cfg.coupling.h = finite(value)?,
        "omega_a" => cfg.coupling.omega_a = finite(value)?,
        "omega_b" => cfg.coupling.omega_b = finite(value)?,
        "initial" => cfg.initial = value.parse()?,
        "workers" => cfg.workers = parse(value, "a positive integer")?,
        "seed" => cfg.seed = parse(value, "a non-negative integer")?,
        "output" => cfg.output = Some(PathBuf::from(value)),
        "input" => cfg.input = Some(PathBuf::from(value)),
        "bra" => cfg.bra = value.parse().map_err(|e| format!("{e}"))?,
        "ket" => cfg.ket = value.parse().map_err(|e| format!("{e}"))?,
        "axis" => cfg.axis = value.parse()?,
        "cases" => cfg.cases = parse(value, "a positive integer")?,
        "method" => cfg.method = value.parse()?,
        _ => unreachable!("key list and apply() out of sync: {key}"),
    }
    Ok(())
}

/// Range checks that need the whole config.
fn check(cfg: &RunConfig) -> Result<(), ConfigError> {
    if cfg.n_sites < 4 || !cfg.n_sites.is_multiple_of(2) {
        return Err(cfg.error("n_sites", format!("must be even and at least 4, got {}", cfg.n_sites)));
    }
    for (key, axis) in [("lambda", cfg.lambda), ("gamma", cfg.gamma), ("t", cfg.time)] {
        axis.validate(key).map_err(|e| cfg.error(key, e.to_string()))?;
    }
    if cfg.workers == 0 {
        return Err(cfg.error("workers", "must be at least 1"));
    }
    if cfg.cases == 0 {
        return Err(cfg.error("cases", "must be at least 1"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stated_values_and_defaults() {
        let cfg = parse_config("n_sites = 8\ngamma = 1.0\nlambda = 0.5").unwrap();
        assert_eq!(cfg.n_sites, 8);
        assert_eq!(cfg.gamma, AxisRange::Fixed(1.0));
        assert_eq!(cfg.lambda, AxisRange::Fixed(0.5));
        assert_eq!(cfg.coupling.g, 0.05);
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.origin("gamma"), Origin::Line(2));
    }

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.n_sites, 1502);
        assert_eq!((cfg.coupling.g, cfg.coupling.h), (0.05, 0.05));
        assert!(cfg.workers >= 1);
    }

    #[test]
    fn comments_and_blank_lines() {
        let cfg = parse_config("# header\n\n  t = 0:2:5   # trailing\n").unwrap();
        assert_eq!(cfg.time, AxisRange::Grid { min: 0.0, max: 2.0, points: 5 });
    }

    #[test]
    fn errors_name_key_and_line() {
        let e = parse_config("n_sites = 7").unwrap_err();
        assert_eq!((e.key.as_str(), e.origin), ("n_sites", Origin::Line(1)));
        assert!(e.to_string().contains("line 1") && e.to_string().contains("n_sites"));

        let e = parse_config("g = 0.1\nbogus = 3").unwrap_err();
        assert_eq!((e.key.as_str(), e.origin), ("bogus", Origin::Line(2)));

        let e = parse_config("g = 0.1\n\ng = 0.2").unwrap_err();
        assert!(e.message.contains("line 1") && e.origin == Origin::Line(3));

        let e = parse_config("seed = -1").unwrap_err();
        assert_eq!(e.key, "seed");
        let e = parse_config("bra = 2").unwrap_err();
        assert_eq!(e.key, "bra");
        let e = parse_config("t = 1:0:5").unwrap_err();
        assert_eq!(e.key, "t");
        let e = parse_config("workers = 0").unwrap_err();
        assert_eq!(e.key, "workers");
        let e = parse_config("g = inf").unwrap_err();
        assert_eq!(e.key, "g");
        assert!(parse_config("just text").is_err());
    }

    #[test]
    fn flags_override_file() {
        let mut s = Settings::parse("n_sites = 8\ng = 0.1").unwrap();
        s.set_flag("g", "0.2").unwrap();
        let cfg = s.build().unwrap();
        assert_eq!(cfg.coupling.g, 0.2);
        assert_eq!(cfg.origin("g"), Origin::Flag);
        s.set_flag("n_sites", "9").unwrap();
        let e = s.build().unwrap_err();
        assert!(e.to_string().starts_with("flag --n-sites"));
    }

    #[test]
    fn single_point_accessors() {
        let cfg = parse_config("n_sites = 8\ngamma = 1\nlambda = 0.5\nt = 1").unwrap();
        assert_eq!(cfg.fixed("t").unwrap(), 1.0);
        assert_eq!(cfg.chain_point().unwrap().n_sites(), 8);
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg.fixed("gamma").unwrap_err().key, "gamma");
    }
}
