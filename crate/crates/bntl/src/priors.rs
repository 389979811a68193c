//! Prior specifications for Bayesian updates and MAP estimation.

use serde::{Deserialize, Serialize};

use crate::arrivals::ArrivalPriors;
use crate::error::{Error, Result};

/// Prior on the discount parameter. The default is flat on `(-100, 1)`,
/// wide enough for the strongly negative discounts seen on dense networks.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AlphaPrior {
    Uniform { lo: f64, hi: f64 },
    Normal { mean: f64, sd: f64 },
}

impl Default for AlphaPrior {
    fn default() -> Self {
        AlphaPrior::Uniform { lo: -100.0, hi: 1.0 }
    }
}

impl AlphaPrior {
    pub fn validate(&self) -> Result<()> {
        match *self {
            AlphaPrior::Uniform { lo, hi } => {
                if !(lo < hi && hi <= 1.0) {
                    return Err(Error::InvalidPrior(format!(
                        "uniform alpha prior needs lo < hi <= 1, got ({lo}, {hi})"
                    )));
                }
            }
            AlphaPrior::Normal { sd, .. } => {
                if !(sd > 0.0 && sd.is_finite()) {
                    return Err(Error::InvalidPrior(format!(
                        "normal alpha prior needs sd > 0, got {sd}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Unnormalized log-density; `-inf` outside the support.
    pub fn log_density(&self, alpha: f64) -> f64 {
        if alpha >= 1.0 {
            return f64::NEG_INFINITY;
        }
        match *self {
            AlphaPrior::Uniform { lo, hi } => {
                if alpha > lo && alpha < hi {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            AlphaPrior::Normal { mean, sd } => {
                let z = (alpha - mean) / sd;
                -0.5 * z * z
            }
        }
    }

    /// Interval outside of which the density is zero (clipped at 1).
    pub fn support(&self) -> (f64, f64) {
        match *self {
            AlphaPrior::Uniform { lo, hi } => (lo, hi.min(1.0)),
            AlphaPrior::Normal { .. } => (f64::NEG_INFINITY, 1.0),
        }
    }
}

/// Priors for every sampled parameter.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct Priors {
    pub alpha: AlphaPrior,
    pub arrivals: ArrivalPriors,
}

impl Priors {
    pub fn validate(&self) -> Result<()> {
        self.alpha.validate()?;
        self.arrivals.validate()
    }
}
