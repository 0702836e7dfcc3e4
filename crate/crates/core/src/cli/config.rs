//! Run configuration: defaults, a flat `key = value` file, and validation.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_3;

use serde::Serialize;

use crate::background::MIN_BACKGROUND_TRUNCATION;
use crate::spectrum::{SpectrumSettings, TrustWindow};
use crate::{Error, Params, Result};

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "NCBRANE_CONFIG";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Delimited,
    Structured,
}

/// Named thresholds and their defaults.
pub const TOLERANCES: &[(&str, f64)] = &[
    // eigenvalue agreement, units of 4 pi z^2 R cos(theta)
    ("eigen", 1e-6),
    // route equivalence, relative to the mass scale
    ("route", 1e-10),
    // top-level weight allowed for a trusted eigenvector
    ("trust", 1e-6),
    // claims under test in the identity suite
    ("identity", 1e-10),
    // |t_min numeric - t_min analytic|
    ("minimum", 1e-8),
    // hyperbola residual / max(1, x0^2)
    ("hyperbola", 1e-10),
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub theta: f64,
    pub z2: f64,
    pub r: f64,
    pub n: usize,
    pub margin: usize,
    pub n_max: usize,
    pub seed: u64,
    pub dim: usize,
    pub x0_min: f64,
    pub x0_max: f64,
    pub points: usize,
    pub format: OutputFormat,
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            theta: FRAC_PI_3,
            z2: 1.0,
            r: 1.0,
            n: 24,
            margin: 4,
            n_max: 8,
            seed: 42,
            dim: 6,
            x0_min: -3.0,
            x0_max: 3.0,
            points: 101,
            format: OutputFormat::Delimited,
            tolerances: TOLERANCES.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("cannot parse {key} = {value:?}")))
}

impl RunConfig {
    /// Defaults overridden by the lines of a config file. Blank lines and
    /// lines starting with `#` are skipped.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("line {}: expected key = value", i + 1)))?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "theta" => self.theta = parse(key, value)?,
            "z2" => self.z2 = parse(key, value)?,
            "R" => self.r = parse(key, value)?,
            "N" => self.n = parse(key, value)?,
            "margin" => self.margin = parse(key, value)?,
            "n_max" => self.n_max = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "dim" => self.dim = parse(key, value)?,
            "x0_min" => self.x0_min = parse(key, value)?,
            "x0_max" => self.x0_max = parse(key, value)?,
            "points" => self.points = parse(key, value)?,
            "format" => {
                self.format = match value {
                    "delimited" => OutputFormat::Delimited,
                    "structured" => OutputFormat::Structured,
                    _ => return Err(Error::InvalidConfig(format!("unknown format {value:?}"))),
                }
            }
            _ => match key.strip_prefix("tol.") {
                Some(name) => self.set_tolerance(name, parse(key, value)?)?,
                None => return Err(Error::InvalidConfig(format!("unknown key {key:?}"))),
            },
        }
        Ok(())
    }

    pub fn set_tolerance(&mut self, name: &str, value: f64) -> Result<()> {
        match self.tolerances.get_mut(name) {
            Some(slot) => {
                *slot = value;
                Ok(())
            }
            None => Err(Error::InvalidConfig(format!("unknown tolerance {name:?}"))),
        }
    }

    pub fn tol(&self, name: &str) -> f64 {
        self.tolerances[name]
    }

    /// Checks every invariant and returns the physical parameters.
    pub fn validate(&self) -> Result<Params> {
        let params = Params::new(self.theta, self.z2, self.r)?;
        if self.z2.is_nan() || self.z2 <= 0.0 {
            return Err(Error::NonPositiveFlux(self.z2));
        }
        for (n, what) in [(self.n, "N"), (self.dim, "dim")] {
            if n < MIN_BACKGROUND_TRUNCATION {
                return Err(Error::InvalidConfig(format!(
                    "{what} = {n} is below the minimum truncation {MIN_BACKGROUND_TRUNCATION}"
                )));
            }
        }
        if self.margin == 0 || self.margin >= self.n {
            return Err(Error::MarginTooLarge { margin: self.margin, dim: self.n });
        }
        if self.points < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points, got {}", self.points)));
        }
        if !(self.x0_min.is_finite() && self.x0_max.is_finite() && self.x0_min < self.x0_max) {
            return Err(Error::InvalidGrid(format!("x0 range [{}, {}] is empty", self.x0_min, self.x0_max)));
        }
        for (k, v) in &self.tolerances {
            if !(v.is_finite() && *v > 0.0) {
                return Err(Error::InvalidConfig(format!("tolerance {k} must be positive, got {v}")));
            }
        }
        Ok(params)
    }

    pub fn spectrum_settings(&self) -> SpectrumSettings {
        SpectrumSettings {
            n: self.n,
            margin: self.margin,
            n_max: self.n_max,
            window: TrustWindow { weight: self.tol("trust"), ..TrustWindow::default() },
            eigen_tol: self.tol("eigen"),
            route_tol: self.tol("route"),
            ..SpectrumSettings::default()
        }
    }
}
