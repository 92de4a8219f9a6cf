//! Component-wise adaptive random-walk Metropolis.
//!
//! Each iteration updates every parameter in turn with a symmetric Gaussian
//! proposal. During burn-in the per-parameter proposal scales are tuned once
//! per adaptation window toward an acceptance rate in `[0.2, 0.5]`; after
//! burn-in they are frozen and every iteration is stored.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::likelihood::Family;
use crate::models::ModelKind;
use crate::posterior::{Layout, PosteriorTarget};
use crate::prior::PriorSpec;

const ACCEPT_LOW: f64 = 0.2;
const ACCEPT_HIGH: f64 = 0.5;
const SCALE_STEP: f64 = 1.3;
const INIT_JITTER: f64 = 0.1;
const INIT_ATTEMPTS: usize = 100;

/// An unnormalized log density over `R^d`.
pub trait LogTarget: Sync {
    fn param_names(&self) -> Vec<String>;

    /// May return `−∞`; `NaN` is treated the same way.
    fn log_density(&self, x: &[f64]) -> f64;

    /// Starting point before per-chain jitter.
    fn initial_point(&self) -> Vec<f64>;

    fn dim(&self) -> usize {
        self.param_names().len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub burn_in: usize,
    pub samples: usize,
    pub chains: usize,
    pub seed: u64,
    /// Per-parameter starting proposal scales; defaults to a tenth of the
    /// magnitude of each starting value (at least 0.1).
    pub initial_scales: Option<Vec<f64>>,
    pub adapt_window: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            burn_in: 5_000,
            samples: 50_000,
            chains: 4,
            seed: 0,
            initial_scales: None,
            adapt_window: 50,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Config("samples must be at least 1".into()));
        }
        if self.chains == 0 {
            return Err(Error::Config("chains must be at least 1".into()));
        }
        if self.adapt_window == 0 {
            return Err(Error::Config("adaptation window must be at least 1".into()));
        }
        if let Some(s) = &self.initial_scales {
            if s.len() != dim {
                return Err(Error::Config(format!("{} initial scales for {dim} parameters", s.len())));
            }
            if s.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
                return Err(Error::Config("initial scales must be finite and non-negative".into()));
            }
        }
        Ok(())
    }
}

/// Post-burn-in draws of one chain, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    pub seed: u64,
    #[serde(skip)]
    pub draws: Vec<f64>,
    /// Post-burn-in acceptance rate per parameter.
    pub acceptance: Vec<f64>,
    /// Proposal scales as frozen at the end of burn-in.
    pub final_scales: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSet {
    pub param_names: Vec<String>,
    pub config: SamplerConfig,
    pub chains: Vec<Chain>,
}

impl ChainSet {
    pub fn n_params(&self) -> usize {
        self.param_names.len()
    }

    /// Draws stored in one chain.
    pub fn draws_per_chain(&self, chain: usize) -> usize {
        self.chains[chain].draws.len() / self.n_params().max(1)
    }

    pub fn total_draws(&self) -> usize {
        (0..self.chains.len()).map(|c| self.draws_per_chain(c)).sum()
    }

    /// All draws, chain by chain.
    pub fn pooled(&self) -> impl Iterator<Item = &[f64]> + '_ {
        let k = self.n_params().max(1);
        self.chains.iter().flat_map(move |c| c.draws.chunks_exact(k))
    }

    /// One parameter across the draws of one chain.
    pub fn chain_column(&self, chain: usize, param: usize) -> Vec<f64> {
        let k = self.n_params();
        self.chains[chain].draws.iter().skip(param).step_by(k).copied().collect()
    }

    /// One parameter pooled across chains.
    pub fn pooled_column(&self, param: usize) -> Vec<f64> {
        (0..self.chains.len())
            .flat_map(|c| self.chain_column(c, param))
            .collect()
    }
}

/// SplitMix64 finalizer applied to `master + stream`; gives independent
/// sub-seeds for chains and fits.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn default_scale(x: f64) -> f64 {
    0.1 * x.abs().max(1.0)
}

fn run_chain<T: LogTarget + ?Sized>(
    target: &T,
    config: &SamplerConfig,
    seed: u64,
) -> Result<Chain> {
    let dim = target.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = target.initial_point();
    if base.len() != dim {
        return Err(Error::Config(format!(
            "initial point has {} values for {dim} parameters",
            base.len()
        )));
    }

    let mut x = Vec::new();
    let mut lp = f64::NEG_INFINITY;
    for _ in 0..INIT_ATTEMPTS {
        x = base
            .iter()
            .map(|&b| b * (1.0 + rng.random_range(-INIT_JITTER..=INIT_JITTER)))
            .collect();
        lp = target.log_density(&x);
        if lp.is_finite() {
            break;
        }
    }
    if !lp.is_finite() {
        return Err(Error::Initialization {
            attempts: INIT_ATTEMPTS,
        });
    }

    let mut scales: Vec<f64> = match &config.initial_scales {
        Some(s) => s.clone(),
        None => x.iter().map(|&v| default_scale(v)).collect(),
    };

    let mut window_accepts = vec![0usize; dim];
    let mut proposal = x.clone();
    for it in 0..config.burn_in {
        for j in 0..dim {
            if metropolis_step(target, &mut x, &mut lp, &mut proposal, j, scales[j], &mut rng) {
                window_accepts[j] += 1;
            }
        }
        if (it + 1) % config.adapt_window == 0 {
            for (s, acc) in scales.iter_mut().zip(window_accepts.iter_mut()) {
                let rate = *acc as f64 / config.adapt_window as f64;
                if rate < ACCEPT_LOW {
                    *s /= SCALE_STEP;
                } else if rate > ACCEPT_HIGH {
                    *s *= SCALE_STEP;
                }
                *acc = 0;
            }
        }
    }

    // frozen from here on
    let scales = scales;
    let mut accepts = vec![0usize; dim];
    let mut draws = Vec::with_capacity(config.samples * dim);
    for _ in 0..config.samples {
        for j in 0..dim {
            if metropolis_step(target, &mut x, &mut lp, &mut proposal, j, scales[j], &mut rng) {
                accepts[j] += 1;
            }
        }
        draws.extend_from_slice(&x);
    }

    Ok(Chain {
        seed,
        draws,
        acceptance: accepts
            .iter()
            .map(|&a| a as f64 / config.samples as f64)
            .collect(),
        final_scales: scales,
    })
}

/// One single-site update of coordinate `j`; returns whether it was accepted.
fn metropolis_step<T: LogTarget + ?Sized, R: Rng>(
    target: &T,
    x: &mut [f64],
    lp: &mut f64,
    proposal: &mut [f64],
    j: usize,
    scale: f64,
    rng: &mut R,
) -> bool {
    proposal.copy_from_slice(x);
    let z: f64 = rng.sample(StandardNormal);
    proposal[j] = x[j] + scale * z;
    let lp_new = target.log_density(proposal);
    let u: f64 = rng.random();
    // NaN compares false and is rejected
    if u.ln() < lp_new - *lp {
        x[j] = proposal[j];
        *lp = lp_new;
        true
    } else {
        false
    }
}

/// Samples any log target. Chains run in parallel, each seeded from
/// `derive_seed(config.seed, chain_index)`.
pub fn sample<T: LogTarget + ?Sized>(target: &T, config: &SamplerConfig) -> Result<ChainSet> {
    config.validate(target.dim())?;
    let chains = (0..config.chains)
        .into_par_iter()
        .map(|c| run_chain(target, config, derive_seed(config.seed, c as u64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ChainSet {
        param_names: target.param_names(),
        config: config.clone(),
        chains,
    })
}

/// Fits `kind` × `family` to `dataset`.
pub fn run_mcmc(
    dataset: &Dataset,
    kind: ModelKind,
    family: Family,
    prior: &PriorSpec,
    config: &SamplerConfig,
) -> Result<ChainSet> {
    let target = PosteriorTarget::new(Layout::new(kind, family), dataset, prior)?;
    sample(&target, config)
}
