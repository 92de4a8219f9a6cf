//! Weakly-informative truncated Gaussian priors.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};
use statrs::function::erf::{erf, erfc};

use crate::error::{Error, Result};
use crate::likelihood::Family;
use crate::models::{param_bounds, Bounds, ModelKind};

pub const DEFAULT_PRIOR_SCALE: f64 = 1e3;

/// Gaussian with the given location and scale, restricted to an open interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedGaussian {
    pub location: f64,
    pub scale: f64,
    pub bounds: Bounds,
    ln_mass: f64,
}

/// `Φ(u) − Φ(l)` for standardized endpoints, evaluated on whichever tail
/// keeps precision.
fn normal_mass(l: f64, u: f64) -> f64 {
    if l >= 0.0 {
        0.5 * (erfc(l / SQRT_2) - erfc(u / SQRT_2))
    } else if u <= 0.0 {
        0.5 * (erfc(-u / SQRT_2) - erfc(-l / SQRT_2))
    } else {
        0.5 * (erf(u / SQRT_2) - erf(l / SQRT_2))
    }
}

impl TruncatedGaussian {
    pub fn new(location: f64, scale: f64, bounds: Bounds) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::Config(format!("prior scale must be positive, got {scale}")));
        }
        if !(bounds.upper > bounds.lower) {
            return Err(Error::Config(format!(
                "empty truncation interval ({}, {})",
                bounds.lower, bounds.upper
            )));
        }
        let mass = normal_mass(
            (bounds.lower - location) / scale,
            (bounds.upper - location) / scale,
        );
        if !(mass > 0.0) {
            return Err(Error::Config("truncation interval carries no prior mass".into()));
        }
        Ok(TruncatedGaussian {
            location,
            scale,
            bounds,
            ln_mass: mass.ln(),
        })
    }

    pub fn log_pdf(&self, x: f64) -> f64 {
        if !self.bounds.contains(x) {
            return f64::NEG_INFINITY;
        }
        let z = (x - self.location) / self.scale;
        -0.5 * z * z - self.scale.ln() - 0.5 * (2.0 * PI).ln() - self.ln_mass
    }
}

/// One truncated Gaussian per free parameter, model parameters first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    terms: Vec<TruncatedGaussian>,
}

impl PriorSpec {
    pub fn new(terms: Vec<TruncatedGaussian>) -> Self {
        PriorSpec { terms }
    }

    /// Zero-centred priors truncated to each parameter's bounds, with the
    /// nuisance parameter (if any) on `(0, ∞)`.
    pub fn for_fit(kind: ModelKind, family: Family, scale: f64, nuisance_scale: f64) -> Result<Self> {
        let mut terms = param_bounds(kind)
            .into_iter()
            .map(|b| TruncatedGaussian::new(0.0, scale, b))
            .collect::<Result<Vec<_>>>()?;
        if family.nuisance_name().is_some() {
            terms.push(TruncatedGaussian::new(0.0, nuisance_scale, Bounds::positive())?);
        }
        Ok(PriorSpec { terms })
    }

    pub fn default_for(kind: ModelKind, family: Family) -> Self {
        Self::for_fit(kind, family, DEFAULT_PRIOR_SCALE, DEFAULT_PRIOR_SCALE)
            .expect("default prior is valid")
    }

    pub fn terms(&self) -> &[TruncatedGaussian] {
        &self.terms
    }

    pub fn bounds(&self) -> Vec<Bounds> {
        self.terms.iter().map(|t| t.bounds).collect()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Sum of per-parameter log densities; `−∞` outside any bound or on a
/// length mismatch.
pub fn log_prior(values: &[f64], prior: &PriorSpec) -> f64 {
    if values.len() != prior.terms.len() {
        return f64::NEG_INFINITY;
    }
    let mut total = 0.0;
    for (t, &v) in prior.terms.iter().zip(values) {
        let lp = t.log_pdf(v);
        if lp == f64::NEG_INFINITY {
            return lp;
        }
        total += lp;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hirsch_outside_interval() {
        let p = PriorSpec::default_for(ModelKind::Hirsch, Family::Poisson);
        assert_eq!(log_prior(&[6.0], &p), f64::NEG_INFINITY);
        assert!(log_prior(&[4.0], &p).is_finite());
    }

    #[test]
    fn boundary_is_outside() {
        let p = PriorSpec::default_for(ModelKind::Hirsch, Family::Poisson);
        assert_eq!(log_prior(&[3.0], &p), f64::NEG_INFINITY);
        assert_eq!(log_prior(&[5.0], &p), f64::NEG_INFINITY);
        let p = PriorSpec::default_for(ModelKind::GlanzelSchubert, Family::Gaussian);
        assert_eq!(log_prior(&[2.0, 0.0, 1.0], &p), f64::NEG_INFINITY);
        assert_eq!(log_prior(&[2.0, 1.0, 0.0], &p), f64::NEG_INFINITY);
        assert_eq!(log_prior(&[1.0, 1.0, 1.0], &p), f64::NEG_INFINITY);
    }

    #[test]
    fn nearly_flat() {
        let p = PriorSpec::default_for(ModelKind::EggheRousseau, Family::Poisson);
        let diff = log_prior(&[10.0], &p) - log_prior(&[1.0 + 1e-9], &p);
        // −(10² − 1²) / (2·10⁶)
        assert!((diff - (-99.0 / 2e6)).abs() < 1e-9);
        assert!(diff.abs() < 1e-3);
    }

    #[test]
    fn normalized_on_its_interval() {
        // trapezoid over (3, 5) and over (0, 40) for a narrow prior
        for (scale, b) in [(1e3, Bounds::new(3.0, 5.0)), (4.0, Bounds::new(1.0, 40.0))] {
            let t = TruncatedGaussian::new(0.0, scale, b).unwrap();
            let n = 200_000;
            let h = (b.upper - b.lower) / n as f64;
            let mut sum = 0.0;
            for i in 1..n {
                sum += t.log_pdf(b.lower + i as f64 * h).exp();
            }
            // the endpoints are outside the open interval; use their limit
            let edge = |x: f64| {
                let z = (x - t.location) / t.scale;
                (-0.5 * z * z - t.scale.ln() - 0.5 * (2.0 * PI).ln() - t.ln_mass).exp()
            };
            sum += 0.5 * (edge(b.lower) + edge(b.upper));
            assert!((sum * h - 1.0).abs() < 1e-8, "{}", sum * h);
        }
    }

    #[test]
    fn invalid_priors() {
        assert!(TruncatedGaussian::new(0.0, 0.0, Bounds::positive()).is_err());
        assert!(TruncatedGaussian::new(0.0, 1.0, Bounds::new(2.0, 2.0)).is_err());
    }

    #[test]
    fn layout_lengths() {
        assert_eq!(PriorSpec::default_for(ModelKind::Hirsch, Family::Poisson).len(), 1);
        assert_eq!(PriorSpec::default_for(ModelKind::TwoParamHirsch, Family::NegBin).len(), 3);
    }
}
