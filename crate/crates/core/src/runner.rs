//! End-to-end runs: ingest, fit every selected model × family, write
//! reports and the comparison table.
//!
//! Output layout under the run directory:
//!
//! ```text
//! manifest.json            config, seed, status, file inventory
//! comparison.csv           model,family,d_bar,rank,top,p_d,dic
//! parameters.csv           model,family,parameter,median,lo,hi
//! <model>__<family>/
//!     chain_<k>.csv        post-burn-in draws
//!     chains.json          sampler config, seeds, acceptance, scales
//!     report.json          posterior summary, d_bar, r_hat
//!     parameters.csv
//!     predictions.csv      id,observed,median,lo,hi,flag
//! ```
//!
//! A failed run leaves an `INCOMPLETE` file and a manifest with status
//! `incomplete`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{parse_dataset, Dataset, Provenance};
use crate::error::{Error, Result};
use crate::likelihood::Family;
use crate::models::ModelKind;
use crate::persist::{read_chain_set, write_chain_set};
use crate::prior::{PriorSpec, DEFAULT_PRIOR_SCALE};
use crate::report::{
    build_fit_report, compare_models, mean_deviance, write_comparison, write_parameters,
    write_predictions, ComparisonRow, FitReport, DEFAULT_TOP_K,
};
use crate::sampler::{derive_seed, run_mcmc, SamplerConfig};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const COMPARISON_FILE: &str = "comparison.csv";
pub const PARAMETERS_FILE: &str = "parameters.csv";
pub const REPORT_FILE: &str = "report.json";
pub const PREDICTIONS_FILE: &str = "predictions.csv";
pub const INCOMPLETE_FILE: &str = "INCOMPLETE";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub data: PathBuf,
    pub name: String,
    pub provenance: Provenance,
    pub models: Vec<ModelKind>,
    pub families: Vec<Family>,
    pub sampler: SamplerConfig,
    pub prior_scale: f64,
    pub top_k: usize,
    #[serde(skip)]
    pub out: PathBuf,
}

impl RunConfig {
    pub fn new(data: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        RunConfig {
            data: data.into(),
            name: "dataset".into(),
            provenance: Provenance::Observed,
            models: ModelKind::ALL.to_vec(),
            families: Family::ALL.to_vec(),
            sampler: SamplerConfig::default(),
            prior_scale: DEFAULT_PRIOR_SCALE,
            top_k: DEFAULT_TOP_K,
            out: out.into(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.models.is_empty() || self.families.is_empty() {
            return Err(Error::Config("select at least one model and one family".into()));
        }
        Ok(())
    }

    /// Selected pairs in canonical (model, family) order, deduplicated.
    pub fn pairs(&self) -> Vec<(ModelKind, Family)> {
        let mut pairs: Vec<_> = self
            .models
            .iter()
            .flat_map(|&m| self.families.iter().map(move |&f| (m, f)))
            .collect();
        pairs.sort();
        pairs.dedup();
        pairs
    }
}

pub fn fit_dir_name(model: ModelKind, family: Family) -> String {
    format!("{}__{}", model.name(), family.name())
}

/// Seed for one pair, independent of which other pairs are selected.
pub fn pair_seed(master: u64, model: ModelKind, family: Family) -> u64 {
    let m = ModelKind::ALL.iter().position(|&k| k == model).unwrap_or(0);
    let f = Family::ALL.iter().position(|&k| k == family).unwrap_or(0);
    derive_seed(master, (m * Family::ALL.len() + f) as u64)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Manifest {
    status: String,
    seed: u64,
    config: RunConfig,
    files: Vec<String>,
    errors: Vec<String>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub reports: Vec<FitReport>,
    pub comparison: Vec<ComparisonRow>,
    pub files: Vec<PathBuf>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut f = create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

fn fit_pair(cfg: &RunConfig, dataset: &Dataset, model: ModelKind, family: Family) -> Result<(FitReport, Vec<PathBuf>)> {
    let prior = PriorSpec::for_fit(model, family, cfg.prior_scale, cfg.prior_scale)?;
    let sampler = SamplerConfig {
        seed: pair_seed(cfg.sampler.seed, model, family),
        ..cfg.sampler.clone()
    };
    let cs = run_mcmc(dataset, model, family, &prior, &sampler)?;
    let dir = cfg.out.join(fit_dir_name(model, family));
    let mut files = write_chain_set(&cs, &dir)?;
    let report = build_fit_report(&cs, dataset, model, family)?;

    let path = dir.join(REPORT_FILE);
    write_json(&report, &path)?;
    files.push(path);
    let path = dir.join(PARAMETERS_FILE);
    write_parameters(std::slice::from_ref(&report), create(&path)?)?;
    files.push(path);
    let path = dir.join(PREDICTIONS_FILE);
    write_predictions(&report.predictions, create(&path)?)?;
    files.push(path);
    Ok((report, files))
}

fn relative(out: &Path, files: &[PathBuf]) -> Vec<String> {
    let mut names: Vec<String> = files
        .iter()
        .map(|p| {
            p.strip_prefix(out)
                .unwrap_or(p)
                .to_string_lossy()
                .replace('\\', "/")
        })
        .collect();
    names.sort();
    names
}

/// Runs every selected pair. The data file is read before anything is
/// written, so an unreadable or invalid input leaves no output behind.
pub fn run_command(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let dataset = parse_dataset(File::open(&cfg.data)?, &cfg.name, cfg.provenance)?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    fs::create_dir_all(&cfg.out)?;
    let _ = fs::remove_file(cfg.out.join(INCOMPLETE_FILE));

    let results: Vec<(ModelKind, Family, Result<(FitReport, Vec<PathBuf>)>)> = cfg
        .pairs()
        .into_par_iter()
        .map(|(m, f)| (m, f, fit_pair(cfg, &dataset, m, f)))
        .collect();

    let mut reports = Vec::new();
    let mut files = Vec::new();
    let mut errors = Vec::new();
    for (m, f, res) in results {
        match res {
            Ok((report, written)) => {
                reports.push(report);
                files.extend(written);
            }
            Err(e) => errors.push(format!("{}: {e}", fit_dir_name(m, f))),
        }
    }

    let comparison = if errors.is_empty() {
        match compare_models(&reports, cfg.top_k) {
            Ok(rows) => {
                let path = cfg.out.join(COMPARISON_FILE);
                write_comparison(&rows, create(&path)?)?;
                files.push(path);
                let path = cfg.out.join(PARAMETERS_FILE);
                write_parameters(&reports, create(&path)?)?;
                files.push(path);
                rows
            }
            Err(e) => {
                errors.push(e.to_string());
                Vec::new()
            }
        }
    } else {
        Vec::new()
    };

    let status = if errors.is_empty() { "complete" } else { "incomplete" };
    let manifest = Manifest {
        status: status.into(),
        seed: cfg.sampler.seed,
        config: cfg.clone(),
        files: relative(&cfg.out, &files),
        errors: errors.clone(),
    };
    write_json(&manifest, &cfg.out.join(MANIFEST_FILE))?;
    files.push(cfg.out.join(MANIFEST_FILE));

    if !errors.is_empty() {
        fs::write(cfg.out.join(INCOMPLETE_FILE), errors.join("\n") + "\n")?;
        return Err(Error::Config(format!("run incomplete: {}", errors.join("; "))));
    }
    Ok(RunOutcome {
        reports,
        comparison,
        files,
    })
}

#[derive(Deserialize)]
struct FitLabel {
    model: ModelKind,
    family: Family,
    d_bar: f64,
}

/// Recomputes the mean deviance of a persisted fit from its chain files.
/// Returns `(recomputed, recorded)`.
pub fn recompute_d_bar(fit_dir: &Path, dataset: &Dataset) -> Result<(f64, f64)> {
    let label: FitLabel = serde_json::from_reader(File::open(fit_dir.join(REPORT_FILE))?)?;
    let cs = read_chain_set(fit_dir)?;
    let d_bar = mean_deviance(&cs, dataset, label.model, label.family)?;
    Ok((d_bar, label.d_bar))
}
