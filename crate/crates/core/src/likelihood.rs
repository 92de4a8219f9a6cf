//! Observation families for the journal h-index.
//!
//! Every family is parameterized so that its mean equals the model mean `mu`:
//! Gaussian `N(mu, sigma²)`, Poisson with rate `mu`, and negative binomial
//! with dispersion `r` and success probability `q = r / (r + mu)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;
use statrs::function::gamma::ln_gamma;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::models::{mean_h, MeanModelSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gaussian,
    Poisson,
    NegBin,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Gaussian, Family::Poisson, Family::NegBin];

    pub fn name(self) -> &'static str {
        match self {
            Family::Gaussian => "gaussian",
            Family::Poisson => "poisson",
            Family::NegBin => "negbin",
        }
    }

    /// Name of the nuisance parameter, if the family has one.
    pub fn nuisance_name(self) -> Option<&'static str> {
        match self {
            Family::Gaussian => Some("sigma"),
            Family::Poisson => None,
            Family::NegBin => Some("r"),
        }
    }

    pub fn is_count(self) -> bool {
        !matches!(self, Family::Gaussian)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown family {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    family: Family,
    nuisance: Option<f64>,
}

impl FamilySpec {
    pub fn new(family: Family, nuisance: Option<f64>) -> Result<Self> {
        match (family.nuisance_name(), nuisance) {
            (Some(_), Some(v)) if v > 0.0 && v.is_finite() => {}
            (None, None) => {}
            (Some(name), Some(v)) => {
                return Err(Error::Domain(format!("{name} must be positive and finite, got {v}")))
            }
            (Some(name), None) => {
                return Err(Error::Domain(format!("{family} requires {name}")))
            }
            (None, Some(_)) => {
                return Err(Error::Domain(format!("{family} takes no nuisance parameter")))
            }
        }
        Ok(FamilySpec { family, nuisance })
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        Self::new(Family::Gaussian, Some(sigma))
    }

    pub fn poisson() -> Self {
        FamilySpec {
            family: Family::Poisson,
            nuisance: None,
        }
    }

    pub fn negbin(r: f64) -> Result<Self> {
        Self::new(Family::NegBin, Some(r))
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn nuisance(&self) -> Option<f64> {
        self.nuisance
    }
}

/// `ln Γ(y + r) − ln Γ(r)` for integer `y`. Small counts are summed
/// directly, which avoids cancellation when `r` is huge.
fn ln_rising(r: f64, y: u64) -> f64 {
    if y <= 64 {
        (0..y).map(|k| (r + k as f64).ln()).sum()
    } else {
        ln_gamma(r + y as f64) - ln_gamma(r)
    }
}

fn count(y: f64) -> Result<u64> {
    if y >= 0.0 && y.fract() == 0.0 && y <= u64::MAX as f64 {
        Ok(y as u64)
    } else {
        Err(Error::Domain(format!("count families need a non-negative integer, got {y}")))
    }
}

pub fn log_density(fam: &FamilySpec, mu: f64, y: f64) -> Result<f64> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::Domain(format!("mean must be positive and finite, got {mu}")));
    }
    match fam.family {
        Family::Gaussian => {
            let sigma = fam.nuisance.unwrap_or(1.0);
            let z = (y - mu) / sigma;
            Ok(-0.5 * (2.0 * PI).ln() - sigma.ln() - 0.5 * z * z)
        }
        Family::Poisson => {
            let k = count(y)?;
            Ok(-mu + y * mu.ln() - ln_factorial(k))
        }
        Family::NegBin => {
            let k = count(y)?;
            let r = fam.nuisance.unwrap_or(1.0);
            // r·ln q = −r·ln(1 + mu/r), y·ln(1 − q) = y·ln(mu / (r + mu))
            let ln_q_term = -r * (mu / r).ln_1p();
            let ln_1mq = mu.ln() - (r + mu).ln();
            let tail = if k == 0 { 0.0 } else { y * ln_1mq };
            Ok(ln_rising(r, k) - ln_factorial(k) + ln_q_term + tail)
        }
    }
}

/// Deviance `−2 Σ log f(h_i | mean_h(P_i, C_i))`, summed in record order.
pub fn total_deviance(fam: &FamilySpec, model: &MeanModelSpec, d: &Dataset) -> Result<f64> {
    let mut sum = 0.0;
    for rec in d.records() {
        let term = mean_h(model, rec.p, rec.c)
            .and_then(|mu| log_density(fam, mu, rec.h as f64))
            .map_err(|e| Error::Record {
                id: rec.id.clone(),
                source: Box::new(e),
            })?;
        sum += term;
    }
    Ok(-2.0 * sum)
}
