//! The four theoretical h-index mean functions of `(P, C)`.
//!
//! | model              | mean h                          | parameters               |
//! |--------------------|---------------------------------|--------------------------|
//! | Egghe-Rousseau     | `P^(1/a)`                       | `a ∈ (1, ∞)`             |
//! | Hirsch             | `sqrt(C/a)`                     | `a ∈ (3, 5)`             |
//! | Glänzel-Schubert   | `c·P^(1/(a+1))·(C/P)^(a/(a+1))` | `a ∈ (1, ∞), c ∈ (0, ∞)` |
//! | two-param Hirsch   | `(C/a)^(1/(a·b))`               | `a ∈ (1, ∞), b ∈ (0, ∞)` |

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    EggheRousseau,
    Hirsch,
    GlanzelSchubert,
    TwoParamHirsch,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::EggheRousseau,
        ModelKind::Hirsch,
        ModelKind::GlanzelSchubert,
        ModelKind::TwoParamHirsch,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::EggheRousseau => "egghe-rousseau",
            ModelKind::Hirsch => "hirsch",
            ModelKind::GlanzelSchubert => "glanzel-schubert",
            ModelKind::TwoParamHirsch => "two-param-hirsch",
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            ModelKind::EggheRousseau | ModelKind::Hirsch => &["a"],
            ModelKind::GlanzelSchubert => &["a", "c"],
            ModelKind::TwoParamHirsch => &["a", "b"],
        }
    }

    pub fn n_params(self) -> usize {
        self.param_names().len()
    }

    /// Whether the mean depends on `C` (and is therefore undefined at `C = 0`).
    pub fn uses_citations(self) -> bool {
        !matches!(self, ModelKind::EggheRousseau)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown model {s:?}")))
    }
}

/// An open interval `(lower, upper)`; `upper` may be `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl Bounds {
    pub const fn new(lower: f64, upper: f64) -> Self {
        Bounds { lower, upper }
    }

    pub const fn positive() -> Self {
        Bounds::new(0.0, f64::INFINITY)
    }

    /// Strict containment; the endpoints themselves are outside.
    pub fn contains(&self, x: f64) -> bool {
        x > self.lower && x < self.upper
    }
}

pub fn param_bounds(kind: ModelKind) -> Vec<Bounds> {
    let above_one = Bounds::new(1.0, f64::INFINITY);
    match kind {
        ModelKind::EggheRousseau => vec![above_one],
        ModelKind::Hirsch => vec![Bounds::new(3.0, 5.0)],
        ModelKind::GlanzelSchubert | ModelKind::TwoParamHirsch => {
            vec![above_one, Bounds::positive()]
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterVector {
    values: Vec<f64>,
    bounds: Vec<Bounds>,
}

impl ParameterVector {
    pub fn new(values: Vec<f64>, bounds: Vec<Bounds>) -> Result<Self> {
        if values.len() != bounds.len() {
            return Err(Error::Domain(format!(
                "{} values for {} bounds",
                values.len(),
                bounds.len()
            )));
        }
        for (i, (&v, b)) in values.iter().zip(&bounds).enumerate() {
            if !b.contains(v) {
                return Err(Error::Domain(format!(
                    "parameter {i} = {v} outside ({}, {})",
                    b.lower, b.upper
                )));
            }
        }
        Ok(ParameterVector { values, bounds })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn bounds(&self) -> &[Bounds] {
        &self.bounds
    }
}

/// A mean model with a validated parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanModelSpec {
    kind: ModelKind,
    params: ParameterVector,
}

impl MeanModelSpec {
    pub fn new(kind: ModelKind, values: &[f64]) -> Result<Self> {
        let params = ParameterVector::new(values.to_vec(), param_bounds(kind))
            .map_err(|e| Error::Domain(format!("{kind}: {e}")))?;
        Ok(MeanModelSpec { kind, params })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn params(&self) -> &ParameterVector {
        &self.params
    }

    /// Mean h at real-valued covariates. `c` is ignored by models that do
    /// not use citations; callers reject `C = 0` beforehand.
    pub fn mean_at(&self, p: f64, c: f64) -> Result<f64> {
        let v = self.params.values();
        let mean = match self.kind {
            ModelKind::EggheRousseau => p.powf(v[0].recip()),
            ModelKind::Hirsch => (c / v[0]).sqrt(),
            ModelKind::GlanzelSchubert => {
                // P^(1/(a+1))·(C/P)^(a/(a+1)) = (C/P)·(P²/C)^(1/(a+1))
                let (a, scale) = (v[0], v[1]);
                scale * (c / p) * (p * p / c).powf((a + 1.0).recip())
            }
            ModelKind::TwoParamHirsch => {
                let (a, b) = (v[0], v[1]);
                (c / a).powf((a * b).recip())
            }
        };
        if mean > 0.0 && mean.is_finite() {
            Ok(mean)
        } else {
            Err(Error::NonFinite(mean))
        }
    }
}

/// Checks that a record's covariates are usable by `kind`.
pub fn check_admissible(kind: ModelKind, p: u64, c: u64) -> Result<()> {
    if p == 0 {
        return Err(Error::Domain("P must be at least 1".into()));
    }
    if c == 0 && kind.uses_citations() {
        return Err(Error::Domain(format!("{kind} is undefined at C = 0")));
    }
    Ok(())
}

pub fn mean_h(spec: &MeanModelSpec, p: u64, c: u64) -> Result<f64> {
    check_admissible(spec.kind, p, c)?;
    spec.mean_at(p as f64, c as f64)
}
