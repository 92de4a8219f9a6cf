//! Between/within-chain convergence diagnostic.

use crate::error::{Error, Result};
use crate::sampler::ChainSet;

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Potential scale reduction per parameter, `sqrt((W + B/n) / W)` with `W`
/// the mean within-chain variance and `B/n` the variance of the chain means.
/// Chains are trimmed to the shortest. Returns 1 when every chain is
/// constant at the same value and `+∞` when chains are constant at different
/// values.
pub fn rhat(cs: &ChainSet) -> Result<Vec<f64>> {
    let m = cs.chains.len();
    if m < 2 {
        return Err(Error::SingleChain);
    }
    let n = (0..m).map(|c| cs.draws_per_chain(c)).min().unwrap_or(0);
    if n < 2 {
        return Err(Error::TooFewDraws { needed: 2, got: n });
    }
    Ok((0..cs.n_params())
        .map(|j| {
            let cols: Vec<Vec<f64>> = (0..m)
                .map(|c| {
                    let mut col = cs.chain_column(c, j);
                    col.truncate(n);
                    col
                })
                .collect();
            let means: Vec<f64> = cols.iter().map(|c| mean(c)).collect();
            let within = mean(&cols.iter().map(|c| sample_variance(c)).collect::<Vec<_>>());
            let between_over_n = sample_variance(&means);
            if within == 0.0 {
                return if between_over_n == 0.0 { 1.0 } else { f64::INFINITY };
            }
            ((within + between_over_n) / within).sqrt()
        })
        .collect())
}
