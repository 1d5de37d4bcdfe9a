//! Flat `key = value` sweep configuration.
//!
//! ```text
//! # reference setting
//! sigma_s2 = 1
//! sigma_eta2 = 30
//! sigma_e2 = 30
//! sigma_e2_tilde = 40
//! P = 1
//! epsilon = 1e-5
//! delta = 0.01
//! d_grid = 0.05, 0.10, 0.15
//! modes = classic, modified, upper_exact
//! seed = 42
//! output = reference.csv
//! ```
//!
//! Unknown keys, duplicate keys and malformed values are rejected with the
//! offending line number. Missing keys keep their defaults.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::bounds::reference_d_grid;
use crate::error::{Error, Result};
use crate::schemes::ChannelParams;

/// Which curves a bounds sweep produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Classic,
    Modified,
    UpperExact,
    UpperAsymptotic,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Classic, Mode::Modified, Mode::UpperExact, Mode::UpperAsymptotic];
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Classic => "classic",
            Mode::Modified => "modified",
            Mode::UpperExact => "upper_exact",
            Mode::UpperAsymptotic => "upper_asymptotic",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Mode::ALL
            .into_iter()
            .find(|m| m.to_string() == s)
            .ok_or_else(|| format!("unknown mode `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub params: ChannelParams,
    pub epsilon: f64,
    pub delta: f64,
    pub d_grid: Vec<f64>,
    pub modes: Vec<Mode>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            params: ChannelParams::reference(),
            epsilon: 1e-5,
            delta: 0.01,
            d_grid: reference_d_grid(),
            modes: Mode::ALL[..3].to_vec(),
            seed: None,
            output: None,
        }
    }
}

fn config_err(line: Option<usize>, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .map_err(|e| config_err(Some(line), format!("{key}: cannot parse `{v}` as a number ({e})")))
}

fn parse_list<T>(line: usize, key: &str, v: &str, f: impl Fn(&str) -> std::result::Result<T, String>) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| f(s).map_err(|e| config_err(Some(line), format!("{key}: {e}"))))
        .collect()
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = SweepConfig::default();
        let mut seen: Vec<(String, usize)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| config_err(Some(line), format!("expected `key = value`, got `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if let Some((_, first)) = seen.iter().find(|(k, _)| k == key) {
                return Err(config_err(Some(line), format!("duplicate key `{key}` (first set on line {first})")));
            }
            seen.push((key.to_string(), line));
            let p = &mut cfg.params;
            match key {
                "sigma_s2" => p.sigma_s2 = parse_f64(line, key, value)?,
                "sigma_eta2" => p.sigma_eta2 = parse_f64(line, key, value)?,
                "sigma_e2" => p.sigma_e2 = parse_f64(line, key, value)?,
                "sigma_e2_tilde" => p.sigma_e2_tilde = parse_f64(line, key, value)?,
                "P" => p.power = parse_f64(line, key, value)?,
                "epsilon" => cfg.epsilon = parse_f64(line, key, value)?,
                "delta" => cfg.delta = parse_f64(line, key, value)?,
                "d_grid" => {
                    cfg.d_grid = parse_list(line, key, value, |s| {
                        s.parse::<f64>().map_err(|e| format!("cannot parse `{s}` ({e})"))
                    })?
                }
                "modes" => cfg.modes = parse_list(line, key, value, Mode::from_str)?,
                "seed" => {
                    cfg.seed = Some(value.parse::<u64>().map_err(|e| {
                        config_err(Some(line), format!("seed: cannot parse `{value}` as u64 ({e})"))
                    })?)
                }
                "output" => cfg.output = Some(PathBuf::from(value)),
                other => return Err(config_err(Some(line), format!("unknown key `{other}`"))),
            }
            cfg.check_key(key, line)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(None, format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Per-key checks that can be attributed to a line.
    fn check_key(&self, key: &str, line: usize) -> Result<()> {
        let res = match key {
            "sigma_s2" | "sigma_eta2" | "sigma_e2" | "sigma_e2_tilde" | "P" => self.params.validate(),
            "epsilon" => self.check_epsilon(),
            "delta" => self.check_delta(),
            "d_grid" => self.check_grid_shape(),
            "modes" => self.check_modes(),
            _ => Ok(()),
        };
        res.map_err(|e| match e {
            Error::Config { message, .. } => config_err(Some(line), message),
            other => config_err(Some(line), other.to_string()),
        })
    }

    fn check_epsilon(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(config_err(None, format!("epsilon = {} must lie in (0, 1)", self.epsilon)));
        }
        Ok(())
    }

    fn check_delta(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(config_err(None, format!("delta = {} must be positive", self.delta)));
        }
        Ok(())
    }

    fn check_grid_shape(&self) -> Result<()> {
        if self.d_grid.is_empty() {
            return Err(config_err(None, "d_grid is empty"));
        }
        for w in self.d_grid.windows(2) {
            if !(w[1] > w[0]) {
                return Err(config_err(None, format!("d_grid must be strictly increasing ({} then {})", w[0], w[1])));
            }
        }
        Ok(())
    }

    fn check_modes(&self) -> Result<()> {
        if self.modes.is_empty() {
            return Err(config_err(None, "modes is empty"));
        }
        Ok(())
    }

    /// Whole-config validation, also run after command-line overrides.
    pub fn validate(&self) -> Result<()> {
        self.params.validate().map_err(|e| config_err(None, e.to_string()))?;
        self.check_epsilon()?;
        self.check_delta()?;
        self.check_grid_shape()?;
        self.check_modes()?;
        if let Some(&d) = self.d_grid.iter().find(|&&d| !(d > 0.0 && d < self.params.sigma_s2)) {
            return Err(config_err(
                None,
                format!("d = {d} lies outside (0, sigma_s2 = {})", self.params.sigma_s2),
            ));
        }
        Ok(())
    }

    pub fn has(&self, mode: Mode) -> bool {
        self.modes.contains(&mode)
    }
}
