//! Log-posterior for a model × family fit.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::likelihood::{log_density, Family, FamilySpec};
use crate::models::{check_admissible, MeanModelSpec, ModelKind};
use crate::prior::{log_prior, PriorSpec};
use crate::sampler::LogTarget;

/// Free-parameter layout of a fit: model parameters, then the nuisance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Layout {
    pub kind: ModelKind,
    pub family: Family,
}

impl Layout {
    pub fn new(kind: ModelKind, family: Family) -> Self {
        Layout { kind, family }
    }

    pub fn names(&self) -> Vec<String> {
        self.kind
            .param_names()
            .iter()
            .copied()
            .chain(self.family.nuisance_name())
            .map(String::from)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.kind.n_params() + usize::from(self.family.nuisance_name().is_some())
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Splits a draw into its mean model and observation family.
    pub fn split(&self, values: &[f64]) -> Result<(MeanModelSpec, FamilySpec)> {
        if values.len() != self.len() {
            return Err(Error::LayoutMismatch {
                expected: self.names(),
                found: vec![format!("{} values", values.len())],
            });
        }
        let k = self.kind.n_params();
        let model = MeanModelSpec::new(self.kind, &values[..k])?;
        let fam = FamilySpec::new(self.family, values.get(k).copied())?;
        Ok((model, fam))
    }

    /// Rejects an empty dataset or any record the mean model cannot evaluate.
    pub fn check_dataset(&self, d: &Dataset) -> Result<()> {
        if d.is_empty() {
            return Err(Error::EmptyDataset);
        }
        for rec in d.records() {
            check_admissible(self.kind, rec.p, rec.c).map_err(|e| Error::Record {
                id: rec.id.clone(),
                source: Box::new(e),
            })?;
        }
        Ok(())
    }
}

struct Covariate {
    p: f64,
    c: f64,
    h: f64,
}

/// The posterior density of one fit as a sampling target. Construction
/// checks that every record is admissible, so evaluation cannot fail.
pub struct PosteriorTarget<'a> {
    layout: Layout,
    prior: &'a PriorSpec,
    covariates: Vec<Covariate>,
}

impl<'a> PosteriorTarget<'a> {
    pub fn new(layout: Layout, dataset: &Dataset, prior: &'a PriorSpec) -> Result<Self> {
        layout.check_dataset(dataset)?;
        if prior.len() != layout.len() {
            return Err(Error::Config(format!(
                "prior has {} terms, layout needs {}",
                prior.len(),
                layout.len()
            )));
        }
        let covariates = dataset
            .records()
            .iter()
            .map(|r| Covariate {
                p: r.p as f64,
                c: r.c as f64,
                h: r.h as f64,
            })
            .collect();
        Ok(PosteriorTarget {
            layout,
            prior,
            covariates,
        })
    }

    /// Log-likelihood at an in-bounds point; `−∞` where the model mean
    /// leaves the positive finite reals.
    fn log_likelihood(&self, values: &[f64]) -> Result<f64> {
        let (model, fam) = self.layout.split(values)?;
        let mut sum = 0.0;
        for cov in &self.covariates {
            let mu = match model.mean_at(cov.p, cov.c) {
                Ok(mu) => mu,
                Err(Error::NonFinite(_)) => return Ok(f64::NEG_INFINITY),
                Err(e) => return Err(e),
            };
            sum += log_density(&fam, mu, cov.h)?;
        }
        Ok(sum)
    }

    pub fn evaluate(&self, values: &[f64]) -> Result<f64> {
        let lp = log_prior(values, self.prior);
        if lp == f64::NEG_INFINITY {
            return Ok(lp);
        }
        Ok(lp + self.log_likelihood(values)?)
    }
}

impl LogTarget for PosteriorTarget<'_> {
    fn param_names(&self) -> Vec<String> {
        self.layout.names()
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        self.evaluate(x).unwrap_or(f64::NEG_INFINITY)
    }

    /// Midpoint of finite bounds, otherwise one above the lower bound.
    fn initial_point(&self) -> Vec<f64> {
        self.prior
            .bounds()
            .iter()
            .map(|b| {
                if b.upper.is_finite() {
                    0.5 * (b.lower + b.upper)
                } else {
                    b.lower + 1.0
                }
            })
            .collect()
    }
}

/// `log_prior + Σ log f(h_i | mean_h(P_i, C_i))`.
pub fn log_posterior(
    values: &[f64],
    kind: ModelKind,
    family: Family,
    dataset: &Dataset,
    prior: &PriorSpec,
) -> Result<f64> {
    PosteriorTarget::new(Layout::new(kind, family), dataset, prior)?.evaluate(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{JournalRecord, Provenance};
    use crate::likelihood::total_deviance;

    fn data(rows: &[(u64, u64, u64)]) -> Dataset {
        let recs = rows
            .iter()
            .enumerate()
            .map(|(i, &(h, p, c))| JournalRecord::new(format!("j{i}"), h, p, c))
            .collect();
        Dataset::new("t", recs, Provenance::Synthetic).unwrap()
    }

    #[test]
    fn out_of_bounds_is_neg_infinity() {
        let d = data(&[(5, 10, 100)]);
        let prior = PriorSpec::default_for(ModelKind::Hirsch, Family::Poisson);
        let lp = log_posterior(&[6.0], ModelKind::Hirsch, Family::Poisson, &d, &prior).unwrap();
        assert_eq!(lp, f64::NEG_INFINITY);
        let prior = PriorSpec::default_for(ModelKind::GlanzelSchubert, Family::Gaussian);
        let lp = log_posterior(&[2.0, 1.0, -1.0], ModelKind::GlanzelSchubert, Family::Gaussian, &d, &prior)
            .unwrap();
        assert_eq!(lp, f64::NEG_INFINITY);
    }

    #[test]
    fn composition_with_deviance() {
        let d = data(&[(5, 10, 100)]);
        let prior = PriorSpec::default_for(ModelKind::Hirsch, Family::Poisson);
        let lp = log_posterior(&[4.0], ModelKind::Hirsch, Family::Poisson, &d, &prior).unwrap();
        let dev = total_deviance(
            &FamilySpec::poisson(),
            &MeanModelSpec::new(ModelKind::Hirsch, &[4.0]).unwrap(),
            &d,
        )
        .unwrap();
        assert!((lp - (log_prior(&[4.0], &prior) - dev / 2.0)).abs() < 1e-12);
        assert!((dev - 3.480_60).abs() < 1e-5);
    }

    #[test]
    fn flat_prior_difference_tracks_deviance() {
        let d = data(&[(12, 300, 2000), (20, 900, 9000), (7, 80, 500), (30, 2500, 40000)]);
        let layout = Layout::new(ModelKind::GlanzelSchubert, Family::NegBin);
        let prior = PriorSpec::default_for(layout.kind, layout.family);
        let x1 = [1.7, 0.7, 4.0];
        let x2 = [2.3, 0.9, 9.0];
        let dev = |x: &[f64]| {
            let (m, f) = layout.split(x).unwrap();
            total_deviance(&f, &m, &d).unwrap()
        };
        let diff_post = log_posterior(&x1, layout.kind, layout.family, &d, &prior).unwrap()
            - log_posterior(&x2, layout.kind, layout.family, &d, &prior).unwrap();
        let diff_dev = -dev(&x1) / 2.0 + dev(&x2) / 2.0;
        assert!((diff_post - diff_dev).abs() < 1e-3);
    }

    #[test]
    fn zero_citations_is_an_error() {
        let d = data(&[(0, 10, 0)]);
        let prior = PriorSpec::default_for(ModelKind::Hirsch, Family::Poisson);
        assert!(log_posterior(&[4.0], ModelKind::Hirsch, Family::Poisson, &d, &prior).is_err());
        let prior = PriorSpec::default_for(ModelKind::EggheRousseau, Family::Poisson);
        assert!(log_posterior(&[2.0], ModelKind::EggheRousseau, Family::Poisson, &d, &prior).is_ok());
    }

    #[test]
    fn initial_points() {
        let d = data(&[(5, 10, 100)]);
        let prior = PriorSpec::default_for(ModelKind::Hirsch, Family::Gaussian);
        let t = PosteriorTarget::new(Layout::new(ModelKind::Hirsch, Family::Gaussian), &d, &prior).unwrap();
        assert_eq!(t.initial_point(), vec![4.0, 1.0]);
        assert_eq!(t.param_names(), vec!["a", "sigma"]);
        let prior = PriorSpec::default_for(ModelKind::TwoParamHirsch, Family::NegBin);
        let t = PosteriorTarget::new(Layout::new(ModelKind::TwoParamHirsch, Family::NegBin), &d, &prior)
            .unwrap();
        assert_eq!(t.initial_point(), vec![2.0, 1.0, 1.0]);
    }
}
