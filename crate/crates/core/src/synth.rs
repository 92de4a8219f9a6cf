//! Synthetic journal datasets drawn from a known model and family.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, JournalRecord, Provenance};
use crate::error::{Error, Result};
use crate::likelihood::{Family, FamilySpec};
use crate::models::{mean_h, MeanModelSpec, ModelKind};

/// Closed range `[low, high]` for log-uniform draws; `low == high` fixes
/// the value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub low: f64,
    pub high: f64,
}

impl Range {
    pub const fn new(low: f64, high: f64) -> Self {
        Range { low, high }
    }

    fn validate(&self, what: &str) -> Result<()> {
        if self.low > 0.0 && self.high >= self.low && self.high.is_finite() {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "{what} range must satisfy 0 < low ≤ high < ∞, got [{}, {}]",
                self.low, self.high
            )))
        }
    }

    fn draw_log_uniform<R: Rng>(&self, rng: &mut R) -> f64 {
        let (lo, hi) = (self.low.ln(), self.high.ln());
        // a draw is taken even for a degenerate range so the stream stays aligned
        let u: f64 = rng.random();
        (lo + u * (hi - lo)).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub name: String,
    pub model: ModelKind,
    pub params: Vec<f64>,
    pub family: Family,
    /// Gaussian sigma or negative-binomial r.
    pub nuisance: Option<f64>,
    pub n: usize,
    pub publications: Range,
    /// Range of the citations-per-paper ratio `C / P`.
    pub citation_rate: Range,
    pub seed: u64,
}

impl SynthConfig {
    pub fn new(model: ModelKind, params: Vec<f64>, family: Family, nuisance: Option<f64>, n: usize, seed: u64) -> Self {
        SynthConfig {
            name: "synthetic".into(),
            model,
            params,
            family,
            nuisance,
            n,
            publications: Range::new(20.0, 5000.0),
            citation_rate: Range::new(1.0, 50.0),
            seed,
        }
    }
}

/// Draws `n` records: `P` and `C/P` log-uniform, `C = max(1, round(P·C/P))`,
/// and `h` from the family at the model mean. Gaussian draws are rounded to
/// the nearest non-negative integer.
pub fn generate_synthetic(cfg: &SynthConfig) -> Result<Dataset> {
    let model = MeanModelSpec::new(cfg.model, &cfg.params)?;
    let fam = FamilySpec::new(cfg.family, cfg.nuisance)?;
    if cfg.n == 0 {
        return Err(Error::Config("n must be at least 1".into()));
    }
    cfg.publications.validate("publication")?;
    cfg.citation_rate.validate("citation rate")?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let width = cfg.n.to_string().len();
    let mut records = Vec::with_capacity(cfg.n);
    for i in 0..cfg.n {
        let p = cfg.publications.draw_log_uniform(&mut rng).round().max(1.0) as u64;
        let rate = cfg.citation_rate.draw_log_uniform(&mut rng);
        let c = (p as f64 * rate).round().max(1.0) as u64;
        let mu = mean_h(&model, p, c)?;
        let h = draw_count(&fam, mu, &mut rng)?;
        records.push(JournalRecord::new(format!("S{:0width$}", i + 1), h, p, c));
    }
    Dataset::new(cfg.name.clone(), records, Provenance::Synthetic)
}

fn draw_count<R: Rng>(fam: &FamilySpec, mu: f64, rng: &mut R) -> Result<u64> {
    let bad = |e: &dyn std::fmt::Display| Error::Domain(format!("cannot sample at mean {mu}: {e}"));
    let y = match fam.family() {
        Family::Gaussian => {
            let sigma = fam.nuisance().unwrap_or(1.0);
            Normal::new(mu, sigma).map_err(|e| bad(&e))?.sample(rng).round().max(0.0)
        }
        Family::Poisson => Poisson::new(mu).map_err(|e| bad(&e))?.sample(rng),
        Family::NegBin => {
            let r = fam.nuisance().unwrap_or(1.0);
            let rate = Gamma::new(r, mu / r).map_err(|e| bad(&e))?.sample(rng);
            if rate > 0.0 {
                Poisson::new(rate).map_err(|e| bad(&e))?.sample(rng)
            } else {
                0.0
            }
        }
    };
    Ok(y as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_dataset() {
        let cfg = SynthConfig::new(ModelKind::GlanzelSchubert, vec![1.77, 0.7], Family::Gaussian, Some(3.0), 50, 8);
        assert_eq!(generate_synthetic(&cfg).unwrap(), generate_synthetic(&cfg).unwrap());
        let other = SynthConfig { seed: 9, ..cfg.clone() };
        assert_ne!(generate_synthetic(&cfg).unwrap(), generate_synthetic(&other).unwrap());
    }

    #[test]
    fn poisson_mean_at_fixed_covariates() {
        let mut cfg = SynthConfig::new(ModelKind::Hirsch, vec![4.0], Family::Poisson, None, 10_000, 3);
        cfg.publications = Range::new(400.0, 400.0);
        cfg.citation_rate = Range::new(10.0, 10.0);
        let d = generate_synthetic(&cfg).unwrap();
        let mu = 1000f64.sqrt();
        assert!(d.records().iter().all(|r| r.p == 400 && r.c == 4000));
        let mean = d.records().iter().map(|r| r.h as f64).sum::<f64>() / d.len() as f64;
        assert!((mean - mu).abs() / mu < 0.02, "{mean} vs {mu}");
    }

    #[test]
    fn small_sigma_rounds_to_mean() {
        let cfg = SynthConfig::new(ModelKind::EggheRousseau, vec![1.8], Family::Gaussian, Some(0.1), 500, 4);
        let d = generate_synthetic(&cfg).unwrap();
        let model = MeanModelSpec::new(ModelKind::EggheRousseau, &[1.8]).unwrap();
        for r in d.records() {
            let mu = mean_h(&model, r.p, r.c).unwrap();
            assert!((r.h as f64 - mu).abs() <= 0.5 + 0.5, "{} vs {mu}", r.h);
        }
        assert!(d.records().iter().all(|r| (20..=5000).contains(&r.p) && r.c >= r.p / 2));
    }

    #[test]
    fn invalid_inputs() {
        let mut cfg = SynthConfig::new(ModelKind::Hirsch, vec![4.0], Family::Poisson, None, 10, 1);
        cfg.publications = Range::new(10.0, 5.0);
        assert!(generate_synthetic(&cfg).is_err());
        cfg.publications = Range::new(0.0, 5.0);
        assert!(generate_synthetic(&cfg).is_err());
        let cfg = SynthConfig::new(ModelKind::Hirsch, vec![6.0], Family::Poisson, None, 10, 1);
        assert!(generate_synthetic(&cfg).is_err());
        let cfg = SynthConfig::new(ModelKind::Hirsch, vec![4.0], Family::Poisson, None, 0, 1);
        assert!(generate_synthetic(&cfg).is_err());
        let cfg = SynthConfig::new(ModelKind::Hirsch, vec![4.0], Family::NegBin, None, 5, 1);
        assert!(generate_synthetic(&cfg).is_err());
    }
}
