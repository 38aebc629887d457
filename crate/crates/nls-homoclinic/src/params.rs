//! Physical and perturbation parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// (ω, α, β, ε) plus the amplitude and phase of the plane wave `a e^{iθ(t)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub amplitude: f64,
    pub gamma: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            omega: 0.8,
            alpha: 1.0,
            beta: 2.0,
            epsilon: 1e-3,
            amplitude: 0.8,
            gamma: 0.0,
        }
    }
}

impl Params {
    pub fn new(omega: f64, alpha: f64, beta: f64, epsilon: f64) -> Self {
        Params {
            omega,
            alpha,
            beta,
            epsilon,
            amplitude: omega,
            gamma: 0.0,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_wave(mut self, amplitude: f64, gamma: f64) -> Self {
        self.amplitude = amplitude;
        self.gamma = gamma;
        self
    }

    /// Range checks used by the config loader and by every resonance computation.
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.omega,
            self.alpha,
            self.beta,
            self.epsilon,
            self.amplitude,
            self.gamma,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Config("all parameters must be finite".into()));
        }
        if !(self.omega > 0.5 && self.omega < 1.5) {
            return Err(Error::Config(format!(
                "omega = {} outside (1/2, 3/2)",
                self.omega
            )));
        }
        if self.epsilon < 0.0 {
            return Err(Error::Config("epsilon must be >= 0".into()));
        }
        if self.amplitude <= 0.0 {
            return Err(Error::Config("amplitude must be > 0".into()));
        }
        Ok(())
    }

    /// The saddle/focus pair on the resonance circle needs `αω < β`.
    pub fn require_resonance(&self) -> Result<()> {
        if self.alpha * self.omega >= self.beta {
            return Err(Error::Domain(format!(
                "αω < β violated: αω = {}, β = {}",
                self.alpha * self.omega,
                self.beta
            )));
        }
        Ok(())
    }

    /// θ_* = arccos(αω/β), the saddle angle of the leading-order plane system.
    pub fn theta_star(&self) -> Result<f64> {
        self.require_resonance()?;
        Ok((self.alpha * self.omega / self.beta).acos())
    }
}
