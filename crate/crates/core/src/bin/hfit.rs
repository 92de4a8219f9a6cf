use std::fs::File;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hbayes::data::{dataset_summary, parse_dataset, Provenance};
use hbayes::runner::{recompute_d_bar, run_command, RunConfig};
use hbayes::sampler::SamplerConfig;
use hbayes::synth::{generate_synthetic, Range, SynthConfig};
use hbayes::{Family, ModelKind, Result};

#[derive(Parser)]
#[command(name = "hfit", version, about = "Fit theoretical h-index models to journal data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit every selected model × family and write reports.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "dataset")]
        name: String,
        /// Comma-separated model names, or "all".
        #[arg(long, default_value = "all")]
        models: String,
        /// Comma-separated family names, or "all".
        #[arg(long, default_value = "all")]
        families: String,
        #[arg(long, default_value_t = 5_000)]
        burnin: usize,
        #[arg(long, default_value_t = 50_000)]
        samples: usize,
        #[arg(long, default_value_t = 4)]
        chains: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Treat the data as synthetic (consistency violations only warn).
        #[arg(long)]
        synthetic: bool,
        #[arg(long, default_value_t = hbayes::prior::DEFAULT_PRIOR_SCALE)]
        prior_scale: f64,
    },
    /// Generate a synthetic dataset from a known model.
    Synth {
        #[arg(long)]
        model: ModelKind,
        /// Comma-separated model parameters, e.g. "1.77,0.70".
        #[arg(long)]
        params: String,
        #[arg(long)]
        family: Family,
        /// Gaussian sigma or negative-binomial r.
        #[arg(long)]
        nuisance: Option<f64>,
        #[arg(long, default_value_t = 134)]
        n: usize,
        /// Publication range "low,high".
        #[arg(long, default_value = "20,5000")]
        p_range: String,
        /// Citations-per-paper range "low,high".
        #[arg(long, default_value = "1,50")]
        ratio_range: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute the mean deviance of a persisted fit from its chain files.
    Dbar {
        #[arg(long)]
        fit_dir: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        synthetic: bool,
    },
    /// Print dataset summary statistics.
    Summary {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        synthetic: bool,
    },
}

fn list<T: Copy + std::str::FromStr<Err = hbayes::Error>>(s: &str, all: &[T]) -> Result<Vec<T>> {
    if s == "all" {
        return Ok(all.to_vec());
    }
    s.split(',').map(|p| p.trim().parse()).collect()
}

fn numbers(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| hbayes::Error::Config(format!("not a number: {p:?}")))
        })
        .collect()
}

fn range(s: &str) -> Result<Range> {
    match numbers(s)?.as_slice() {
        &[low, high] => Ok(Range::new(low, high)),
        _ => Err(hbayes::Error::Config(format!("expected \"low,high\", got {s:?}"))),
    }
}

fn provenance(synthetic: bool) -> Provenance {
    if synthetic {
        Provenance::Synthetic
    } else {
        Provenance::Observed
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit {
            data,
            name,
            models,
            families,
            burnin,
            samples,
            chains,
            seed,
            out,
            synthetic,
            prior_scale,
        } => {
            let cfg = RunConfig {
                name,
                provenance: provenance(synthetic),
                models: list(&models, &ModelKind::ALL)?,
                families: list(&families, &Family::ALL)?,
                sampler: SamplerConfig {
                    burn_in: burnin,
                    samples,
                    chains,
                    seed,
                    ..SamplerConfig::default()
                },
                prior_scale,
                ..RunConfig::new(data, out)
            };
            let outcome = run_command(&cfg)?;
            println!("{:<18} {:<9} {:>14} {:>5}", "model", "family", "d_bar", "rank");
            for row in &outcome.comparison {
                println!(
                    "{:<18} {:<9} {:>14.4} {:>5}{}",
                    row.model.name(),
                    row.family.name(),
                    row.d_bar,
                    row.rank,
                    if row.top { " *" } else { "" }
                );
            }
        }
        Command::Synth {
            model,
            params,
            family,
            nuisance,
            n,
            p_range,
            ratio_range,
            seed,
            out,
        } => {
            let cfg = SynthConfig {
                publications: range(&p_range)?,
                citation_rate: range(&ratio_range)?,
                ..SynthConfig::new(model, numbers(&params)?, family, nuisance, n, seed)
            };
            let d = generate_synthetic(&cfg)?;
            for w in d.consistency_warnings() {
                eprintln!("warning: {w}");
            }
            d.write_csv(File::create(&out)?)?;
        }
        Command::Dbar {
            fit_dir,
            data,
            synthetic,
        } => {
            let d = parse_dataset(File::open(&data)?, "dataset", provenance(synthetic))?;
            let (recomputed, recorded) = recompute_d_bar(&fit_dir, &d)?;
            println!("recomputed {recomputed}");
            println!("recorded   {recorded}");
        }
        Command::Summary { data, synthetic } => {
            let d = parse_dataset(File::open(&data)?, "dataset", provenance(synthetic))?;
            for w in d.consistency_warnings() {
                eprintln!("warning: {w}");
            }
            println!("{}", serde_json::to_string_pretty(&dataset_summary(&d)?)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
