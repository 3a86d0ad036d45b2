use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::pde::SolverSettings;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Hopf,
    Halving,
    Symmetrize,
    Theorem,
    Duality,
}

impl Command {
    pub const ALL: [Command; 5] = [Command::Hopf, Command::Halving, Command::Symmetrize, Command::Theorem, Command::Duality];

    pub fn name(self) -> &'static str {
        match self {
            Command::Hopf => "hopf",
            Command::Halving => "halving",
            Command::Symmetrize => "symmetrize",
            Command::Theorem => "theorem",
            Command::Duality => "duality",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Command::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| ConfigError::UnknownCommand(s.to_string()))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("unknown command {0:?}")]
    UnknownCommand(String),
    #[error("{0} must be positive, got {1}")]
    NotPositive(&'static str, f64),
    #[error("exponent must exceed 1, got {0}")]
    BadExponent(f64),
    #[error("box ({0}, {1}) must be symmetric about 0 with a < b")]
    BadBox(f64, f64),
    #[error("thickening radius {r_thick} is below the grid spacing {h}")]
    ThinTube { r_thick: f64, h: f64 },
    #[error("case count must be positive")]
    NoCases,
    #[error("cannot parse {0:?} as a number")]
    BadNumber(String),
}

/// Settings shared by all commands. Unset options take the command's defaults.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub command: Command,
    /// The grid box is `[a, b]³` with `a = −b`.
    pub bounds: Option<(f64, f64)>,
    pub h: Option<f64>,
    pub r_thick: Option<f64>,
    pub p: f64,
    /// Regularization `ε` relative to the starting gradient.
    pub eps_rel: f64,
    pub tol: f64,
    pub seed: u64,
    pub cases: Option<usize>,
    /// Not part of the hash.
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        let s = SolverSettings::default();
        ExperimentConfig {
            command,
            bounds: None,
            h: None,
            r_thick: None,
            p: s.p,
            eps_rel: s.eps_rel,
            tol: s.tol,
            seed: 1,
            cases: None,
            out: None,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.p > 1.0) {
            return Err(ConfigError::BadExponent(self.p));
        }
        for (name, v) in [("tol", self.tol), ("eps", self.eps_rel)] {
            if !(v > 0.0) {
                return Err(ConfigError::NotPositive(name, v));
            }
        }
        if let Some(h) = self.h {
            if !(h > 0.0) {
                return Err(ConfigError::NotPositive("h", h));
            }
        }
        if let Some(r) = self.r_thick {
            if !(r > 0.0) {
                return Err(ConfigError::NotPositive("r_thick", r));
            }
            if let Some(h) = self.h {
                if r < h {
                    return Err(ConfigError::ThinTube { r_thick: r, h });
                }
            }
        }
        if let Some((a, b)) = self.bounds {
            if !(a < b) || (a + b).abs() > 1e-12 * b.abs() {
                return Err(ConfigError::BadBox(a, b));
            }
        }
        if self.cases == Some(0) {
            return Err(ConfigError::NoCases);
        }
        Ok(())
    }

    /// Half-width of the box, or `default`.
    pub fn half(&self, default: f64) -> f64 {
        self.bounds.map_or(default, |(_, b)| b)
    }

    pub fn cases(&self, default: usize) -> usize {
        self.cases.unwrap_or(default)
    }

    pub fn solver(&self) -> SolverSettings {
        SolverSettings { p: self.p, eps_rel: self.eps_rel, tol: self.tol, ..SolverSettings::default() }
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(&Sha256::digest(&bytes)[..8])
    }
}

/// Parses `0.015625`, `1/64` or `-3`.
pub fn parse_number(s: &str) -> Result<f64, ConfigError> {
    let bad = || ConfigError::BadNumber(s.to_string());
    match s.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.trim().parse().map_err(|_| bad())?;
            let d: f64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0.0 {
                return Err(bad());
            }
            Ok(n / d)
        }
        None => s.trim().parse().map_err(|_| bad()),
    }
}

/// Parses `a,b`.
pub fn parse_bounds(s: &str) -> Result<(f64, f64), ConfigError> {
    let (a, b) = s.split_once(',').ok_or_else(|| ConfigError::BadNumber(s.to_string()))?;
    Ok((parse_number(a)?, parse_number(b)?))
}
