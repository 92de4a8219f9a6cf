//! On-disk chain sets: one CSV per chain plus `chains.json` metadata.
//!
//! Values are written with Rust's shortest round-trip float formatting, so
//! reading a chain set back reproduces every draw bit for bit.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::sampler::ChainSet;

pub const META_FILE: &str = "chains.json";

pub fn chain_file_name(index: usize) -> String {
    format!("chain_{index}.csv")
}

/// Writes the chain set into `dir` and returns the files written.
pub fn write_chain_set(cs: &ChainSet, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::with_capacity(cs.chains.len() + 1);
    let k = cs.n_params();
    for (i, chain) in cs.chains.iter().enumerate() {
        let path = dir.join(chain_file_name(i));
        let mut w = csv::Writer::from_writer(BufWriter::new(File::create(&path)?));
        w.write_record(&cs.param_names)?;
        let mut row = Vec::with_capacity(k);
        for draw in chain.draws.chunks_exact(k.max(1)) {
            row.clear();
            row.extend(draw.iter().map(f64::to_string));
            w.write_record(&row)?;
        }
        w.flush()?;
        files.push(path);
    }
    let meta = dir.join(META_FILE);
    let mut f = BufWriter::new(File::create(&meta)?);
    serde_json::to_writer_pretty(&mut f, cs)?;
    f.write_all(b"\n")?;
    f.flush()?;
    files.push(meta);
    Ok(files)
}

pub fn read_chain_set(dir: &Path) -> Result<ChainSet> {
    let mut cs: ChainSet =
        serde_json::from_reader(BufReader::new(File::open(dir.join(META_FILE))?))?;
    let k = cs.n_params();
    for (i, chain) in cs.chains.iter_mut().enumerate() {
        let mut rdr = csv::Reader::from_path(dir.join(chain_file_name(i)))?;
        let header: Vec<String> = rdr.headers()?.iter().map(String::from).collect();
        if header != cs.param_names {
            return Err(Error::LayoutMismatch {
                expected: cs.param_names.clone(),
                found: header,
            });
        }
        let mut draws = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let row = rec.position().map_or(0, |p| p.line());
            if rec.len() != k {
                return Err(Error::Parse {
                    row,
                    message: format!("expected {k} values, found {}", rec.len()),
                });
            }
            for field in rec.iter() {
                draws.push(field.parse::<f64>().map_err(|_| Error::Parse {
                    row,
                    message: format!("not a number: {field:?}"),
                })?);
            }
        }
        chain.draws = draws;
    }
    Ok(cs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{sample, LogTarget, SamplerConfig};

    struct Banana;

    impl LogTarget for Banana {
        fn param_names(&self) -> Vec<String> {
            vec!["u".into(), "v".into()]
        }
        fn log_density(&self, x: &[f64]) -> f64 {
            -0.5 * x[0] * x[0] - 0.5 * (x[1] - x[0] * x[0]).powi(2) / 0.1
        }
        fn initial_point(&self) -> Vec<f64> {
            vec![0.3, 0.2]
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let cfg = SamplerConfig {
            burn_in: 200,
            samples: 300,
            chains: 3,
            seed: 5,
            ..Default::default()
        };
        let cs = sample(&Banana, &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = write_chain_set(&cs, dir.path()).unwrap();
        assert_eq!(files.len(), 4);
        let back = read_chain_set(dir.path()).unwrap();
        assert_eq!(back, cs);
        for (a, b) in back.chains.iter().zip(&cs.chains) {
            assert!(a.draws.iter().zip(&b.draws).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }

    #[test]
    fn header_mismatch_is_rejected() {
        let cfg = SamplerConfig {
            burn_in: 10,
            samples: 10,
            chains: 1,
            ..Default::default()
        };
        let cs = sample(&Banana, &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_chain_set(&cs, dir.path()).unwrap();
        fs::write(dir.path().join(chain_file_name(0)), "u,w\n1,2\n").unwrap();
        assert!(matches!(read_chain_set(dir.path()), Err(Error::LayoutMismatch { .. })));
    }
}
