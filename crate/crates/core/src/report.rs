//! Posterior summaries, mean deviance, model ranking and prediction tables.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::diagnostics::rhat;
use crate::error::{Error, Result};
use crate::likelihood::{total_deviance, Family, FamilySpec};
use crate::models::{mean_h, ModelKind};
use crate::posterior::Layout;
use crate::sampler::ChainSet;

/// Fewest pooled draws for which a 2.5% quantile is reported.
pub const MIN_SUMMARY_DRAWS: usize = 40;
pub const DEFAULT_TOP_K: usize = 3;

/// Quantile of sorted data, interpolating linearly between the order
/// statistics around the 1-based position `p·(n−1) + 1`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    match sorted.get(lo + 1) {
        Some(&next) if frac > 0.0 => sorted[lo] + frac * (next - sorted[lo]),
        _ => sorted[lo],
    }
}

/// `(2.5%, 50%, 97.5%)` of unsorted values.
fn interval(mut values: Vec<f64>) -> (f64, f64, f64) {
    values.sort_by(f64::total_cmp);
    (
        quantile_sorted(&values, 0.025),
        quantile_sorted(&values, 0.5),
        quantile_sorted(&values, 0.975),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub name: String,
    pub median: f64,
    pub lo: f64,
    pub hi: f64,
}

pub fn posterior_summary(cs: &ChainSet) -> Result<Vec<ParamSummary>> {
    let total = cs.total_draws();
    if total < MIN_SUMMARY_DRAWS {
        return Err(Error::TooFewDraws {
            needed: MIN_SUMMARY_DRAWS,
            got: total,
        });
    }
    Ok(cs
        .param_names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let (lo, median, hi) = interval(cs.pooled_column(j));
            ParamSummary {
                name: name.clone(),
                median,
                lo,
                hi,
            }
        })
        .collect())
}

fn check_layout(cs: &ChainSet, layout: &Layout) -> Result<()> {
    let expected = layout.names();
    if cs.param_names != expected {
        return Err(Error::LayoutMismatch {
            expected,
            found: cs.param_names.clone(),
        });
    }
    Ok(())
}

/// Deviance of the whole dataset at one parameter draw.
pub fn deviance_at(layout: &Layout, dataset: &Dataset, values: &[f64]) -> Result<f64> {
    let (model, fam) = layout.split(values)?;
    total_deviance(&fam, &model, dataset)
}

/// Average deviance over all pooled draws, accumulated chain by chain in
/// draw order.
pub fn mean_deviance(cs: &ChainSet, dataset: &Dataset, kind: ModelKind, family: Family) -> Result<f64> {
    let layout = Layout::new(kind, family);
    check_layout(cs, &layout)?;
    let mut sum = 0.0;
    let mut count = 0usize;
    for draw in cs.pooled() {
        sum += deviance_at(&layout, dataset, draw)?;
        count += 1;
    }
    if count == 0 {
        return Err(Error::TooFewDraws { needed: 1, got: 0 });
    }
    Ok(sum / count as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub id: String,
    pub observed: u64,
    pub median: f64,
    pub lo: f64,
    pub hi: f64,
    /// Why the record could not be predicted, if it could not.
    pub flag: Option<String>,
}

/// Per-record quantiles of the model mean over the posterior draws.
pub fn predict_observed_table(cs: &ChainSet, dataset: &Dataset, kind: ModelKind) -> Result<Vec<PredictionRow>> {
    let k = kind.n_params();
    if cs.n_params() < k || cs.param_names[..k] != *kind.param_names() {
        return Err(Error::LayoutMismatch {
            expected: kind.param_names().iter().map(|s| s.to_string()).collect(),
            found: cs.param_names.clone(),
        });
    }
    let models = cs
        .pooled()
        .map(|d| crate::models::MeanModelSpec::new(kind, &d[..k]))
        .collect::<Result<Vec<_>>>()?;
    if models.is_empty() {
        return Err(Error::TooFewDraws { needed: 1, got: 0 });
    }
    Ok(dataset
        .records()
        .iter()
        .map(|rec| {
            let means: Result<Vec<f64>> = models.iter().map(|m| mean_h(m, rec.p, rec.c)).collect();
            match means {
                Ok(means) => {
                    let (lo, median, hi) = interval(means);
                    PredictionRow {
                        id: rec.id.clone(),
                        observed: rec.h,
                        median,
                        lo,
                        hi,
                        flag: None,
                    }
                }
                Err(e) => PredictionRow {
                    id: rec.id.clone(),
                    observed: rec.h,
                    median: f64::NAN,
                    lo: f64::NAN,
                    hi: f64::NAN,
                    flag: Some(e.to_string()),
                },
            }
        })
        .collect())
}

fn draw_observation(fam: &FamilySpec, mu: f64, rng: &mut ChaCha8Rng) -> f64 {
    match fam.family() {
        Family::Gaussian => {
            let sigma = fam.nuisance().unwrap_or(1.0);
            Normal::new(mu, sigma).map_or(mu, |d| d.sample(rng))
        }
        Family::Poisson => Poisson::new(mu).map_or(0.0, |d| d.sample(rng)),
        Family::NegBin => {
            let r = fam.nuisance().unwrap_or(1.0);
            let rate = Gamma::new(r, mu / r).map_or(mu, |g| g.sample(rng));
            if rate > 0.0 {
                Poisson::new(rate).map_or(0.0, |d| d.sample(rng))
            } else {
                0.0
            }
        }
    }
}

/// Posterior-predictive variant of [`predict_observed_table`]: quantiles of
/// one simulated observation per draw rather than of the mean.
pub fn predictive_table(
    cs: &ChainSet,
    dataset: &Dataset,
    kind: ModelKind,
    family: Family,
    seed: u64,
) -> Result<Vec<PredictionRow>> {
    let layout = Layout::new(kind, family);
    check_layout(cs, &layout)?;
    let specs = cs.pooled().map(|d| layout.split(d)).collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(dataset
        .records()
        .iter()
        .map(|rec| {
            let mut ys = Vec::with_capacity(specs.len());
            for (model, fam) in &specs {
                match mean_h(model, rec.p, rec.c) {
                    Ok(mu) => ys.push(draw_observation(fam, mu, &mut rng)),
                    Err(e) => {
                        return PredictionRow {
                            id: rec.id.clone(),
                            observed: rec.h,
                            median: f64::NAN,
                            lo: f64::NAN,
                            hi: f64::NAN,
                            flag: Some(e.to_string()),
                        }
                    }
                }
            }
            let (lo, median, hi) = interval(ys);
            PredictionRow {
                id: rec.id.clone(),
                observed: rec.h,
                median,
                lo,
                hi,
                flag: None,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub dataset: String,
    pub n_records: usize,
    pub model: ModelKind,
    pub family: Family,
    pub params: Vec<ParamSummary>,
    pub d_bar: f64,
    /// Deviance at the posterior mean; used only for the DIC extras.
    pub d_at_mean: Option<f64>,
    pub p_d: Option<f64>,
    pub dic: Option<f64>,
    pub r_hat: Option<Vec<f64>>,
    pub acceptance: Vec<Vec<f64>>,
    pub n_draws: usize,
    /// Written separately as `predictions.csv`.
    #[serde(skip)]
    pub predictions: Vec<PredictionRow>,
}

pub fn build_fit_report(cs: &ChainSet, dataset: &Dataset, kind: ModelKind, family: Family) -> Result<FitReport> {
    let layout = Layout::new(kind, family);
    let params = posterior_summary(cs)?;
    let d_bar = mean_deviance(cs, dataset, kind, family)?;
    let n = cs.total_draws() as f64;
    let post_mean: Vec<f64> = (0..cs.n_params())
        .map(|j| cs.pooled_column(j).iter().sum::<f64>() / n)
        .collect();
    let d_at_mean = deviance_at(&layout, dataset, &post_mean).ok();
    let p_d = d_at_mean.map(|d| d_bar - d);
    let r_hat = if cs.chains.len() >= 2 { rhat(cs).ok() } else { None };
    Ok(FitReport {
        dataset: dataset.name().to_string(),
        n_records: dataset.len(),
        model: kind,
        family,
        params,
        d_bar,
        d_at_mean,
        p_d,
        dic: p_d.map(|p| d_bar + p),
        r_hat,
        acceptance: cs.chains.iter().map(|c| c.acceptance.clone()).collect(),
        n_draws: cs.total_draws(),
        predictions: predict_observed_table(cs, dataset, kind)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model: ModelKind,
    pub family: Family,
    pub d_bar: f64,
    pub rank: usize,
    pub top: bool,
    pub p_d: Option<f64>,
    pub dic: Option<f64>,
}

/// Ranks fits by ascending mean deviance, ties broken by model then family
/// name, and marks the best `top_k`.
pub fn compare_models(reports: &[FitReport], top_k: usize) -> Result<Vec<ComparisonRow>> {
    if let Some(first) = reports.first() {
        for r in &reports[1..] {
            if r.dataset != first.dataset || r.n_records != first.n_records {
                return Err(Error::MixedDatasets(first.dataset.clone(), r.dataset.clone()));
            }
        }
    }
    let mut order: Vec<&FitReport> = reports.iter().collect();
    order.sort_by(|a, b| {
        a.d_bar
            .total_cmp(&b.d_bar)
            .then_with(|| a.model.name().cmp(b.model.name()))
            .then_with(|| a.family.name().cmp(b.family.name()))
    });
    Ok(order
        .into_iter()
        .enumerate()
        .map(|(i, r)| ComparisonRow {
            model: r.model,
            family: r.family,
            d_bar: r.d_bar,
            rank: i + 1,
            top: i < top_k,
            p_d: r.p_d,
            dic: r.dic,
        })
        .collect())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `model,family,d_bar,rank,top,p_d,dic`; the last two columns are
/// deviance-information extras, not part of the ranking.
pub fn write_comparison<W: Write>(rows: &[ComparisonRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["model", "family", "d_bar", "rank", "top", "p_d", "dic"])?;
    for r in rows {
        w.write_record([
            r.model.name(),
            r.family.name(),
            &r.d_bar.to_string(),
            &r.rank.to_string(),
            if r.top { "1" } else { "0" },
            &opt(r.p_d),
            &opt(r.dic),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `model,family,parameter,median,lo,hi`, one row per parameter per report.
pub fn write_parameters<W: Write>(reports: &[FitReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["model", "family", "parameter", "median", "lo", "hi"])?;
    for r in reports {
        for p in &r.params {
            w.write_record([
                r.model.name(),
                r.family.name(),
                &p.name,
                &p.median.to_string(),
                &p.lo.to_string(),
                &p.hi.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `id,observed,median,lo,hi,flag`.
pub fn write_predictions<W: Write>(rows: &[PredictionRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["id", "observed", "median", "lo", "hi", "flag"])?;
    for r in rows {
        w.write_record([
            r.id.as_str(),
            &r.observed.to_string(),
            &r.median.to_string(),
            &r.lo.to_string(),
            &r.hi.to_string(),
            r.flag.as_deref().unwrap_or(""),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_comparison<R: std::io::Read>(input: R) -> Result<Vec<ComparisonRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let bad = |what: &str| Error::Parse {
            row: rec.position().map_or(0, |p| p.line()),
            message: format!("bad {what}"),
        };
        let num = |i: usize| -> Result<Option<f64>> {
            match &rec[i] {
                "" => Ok(None),
                s => s.parse().map(Some).map_err(|_| bad("number")),
            }
        };
        rows.push(ComparisonRow {
            model: rec[0].parse()?,
            family: rec[1].parse()?,
            d_bar: num(2)?.ok_or_else(|| bad("d_bar"))?,
            rank: rec[3].parse().map_err(|_| bad("rank"))?,
            top: &rec[4] == "1",
            p_d: num(5)?,
            dic: num(6)?,
        });
    }
    Ok(rows)
}
