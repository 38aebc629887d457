//! JSON run configuration: sections `params`, `grid`, `quadrature`, `evolution`, `tracking`.
//! Every key is optional; unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{EvolutionSpec, TrackingSpec};
use crate::melnikov::QuadratureSpec;
use crate::params::Params;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    /// Collocation points on [0, 2π).
    pub n: usize,
    /// Mode cutoff for normal-form tables.
    pub k_max: i64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { n: 256, k_max: 16 }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 8 || !self.n.is_power_of_two() {
            return Err(Error::Config(format!(
                "n = {} must be a power of two >= 8",
                self.n
            )));
        }
        if self.k_max < 1 {
            return Err(Error::Config(format!(
                "k_max = {} must be >= 1",
                self.k_max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub params: Params,
    pub grid: GridSpec,
    pub quadrature: QuadratureSpec,
    pub evolution: EvolutionSpec,
    pub tracking: TrackingSpec,
}

fn section(name: &str, r: Result<()>) -> Result<()> {
    r.map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{name}: {m}")),
        other => Error::Config(format!("{name}: {other}")),
    })
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        section("params", self.params.validate())?;
        section("grid", self.grid.validate())?;
        section("quadrature", self.quadrature.validate())?;
        section("evolution", self.evolution.validate())?;
        section("tracking", self.tracking.validate())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Config = if text.trim().is_empty() {
            Config::default()
        } else {
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Defaults when `path` is `None`.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Config::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
                Config::from_json(&text)
            }
        }
    }
}
