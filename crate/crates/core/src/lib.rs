//! Bayesian fitting of theoretical h-index models to journal bibliometric
//! data.
//!
//! Four mean functions of publications `P` and citations `C`
//! ([`models`]) are combined with Gaussian, Poisson and negative-binomial
//! observation families ([`likelihood`]) under truncated Gaussian priors
//! ([`prior`]). Posteriors are sampled with component-wise adaptive
//! random-walk Metropolis ([`sampler`]) and summarized as medians with 95%
//! credible intervals, posterior mean deviance and per-journal predictions
//! ([`report`]). [`runner`] wires it all into reproducible runs.

pub mod data;
pub mod diagnostics;
pub mod error;
pub mod likelihood;
pub mod models;
pub mod persist;
pub mod posterior;
pub mod prior;
pub mod report;
pub mod runner;
pub mod sampler;
pub mod synth;

pub use data::{dataset_summary, parse_dataset, Dataset, JournalRecord, Provenance};
pub use diagnostics::rhat;
pub use error::{Error, Result};
pub use likelihood::{log_density, total_deviance, Family, FamilySpec};
pub use models::{mean_h, param_bounds, Bounds, MeanModelSpec, ModelKind};
pub use posterior::{log_posterior, Layout, PosteriorTarget};
pub use prior::{log_prior, PriorSpec};
pub use report::{
    compare_models, mean_deviance, posterior_summary, predict_observed_table, FitReport,
};
pub use runner::{run_command, RunConfig};
pub use sampler::{run_mcmc, sample, ChainSet, LogTarget, SamplerConfig};
pub use synth::{generate_synthetic, SynthConfig};
