//! Journal bibliometric records and tabular ingestion.
//!
//! A dataset file is comma-delimited UTF-8 with a header naming the columns
//! `id`, `h`, `P` and `C` (in any order). Blank lines are skipped. Fields are
//! never quoted, so an id containing a comma produces a row with too many
//! fields and is rejected.

use std::collections::HashSet;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One journal's `(h, P, C)` observation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JournalRecord {
    pub id: String,
    /// Journal h-index.
    pub h: u64,
    /// Total publications.
    pub p: u64,
    /// Total citations.
    pub c: u64,
}

/// A bibliometric rule a record can break.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Consistency {
    HAtMostP,
    HSquaredAtMostC,
}

impl fmt::Display for Consistency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Consistency::HAtMostP => f.write_str("h ≤ P"),
            Consistency::HSquaredAtMostC => f.write_str("h² ≤ C"),
        }
    }
}

impl JournalRecord {
    pub fn new(id: impl Into<String>, h: u64, p: u64, c: u64) -> Self {
        JournalRecord {
            id: id.into(),
            h,
            p,
            c,
        }
    }

    /// Rules this record breaks, in a fixed order.
    pub fn violations(&self) -> Vec<Consistency> {
        let mut out = Vec::new();
        if self.h > self.p {
            out.push(Consistency::HAtMostP);
        }
        if u128::from(self.h) * u128::from(self.h) > u128::from(self.c) {
            out.push(Consistency::HSquaredAtMostC);
        }
        out
    }

    pub fn is_consistent(&self) -> bool {
        self.violations().is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Observed,
    Synthetic,
}

impl FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "observed" => Ok(Provenance::Observed),
            "synthetic" => Ok(Provenance::Synthetic),
            other => Err(Error::Config(format!("unknown provenance {other:?}"))),
        }
    }
}

/// An ordered, immutable collection of journal records.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    name: String,
    records: Vec<JournalRecord>,
    provenance: Provenance,
}

/// A consistency rule broken by a synthetic record. Observed data never
/// produces these; the violation is a hard error instead.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsistencyWarning {
    pub row: u64,
    pub id: String,
    pub rule: Consistency,
}

impl fmt::Display for ConsistencyWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "row {} ({}): {} violated", self.row, self.id, self.rule)
    }
}

impl Dataset {
    /// Builds a dataset, rejecting duplicate ids, `P = 0`, and (for observed
    /// provenance) any record that breaks a consistency rule. Rows are
    /// numbered from 1 in error messages.
    pub fn new(
        name: impl Into<String>,
        records: Vec<JournalRecord>,
        provenance: Provenance,
    ) -> Result<Self> {
        let rows: Vec<u64> = (1..=records.len() as u64).collect();
        Self::with_rows(name.into(), records, provenance, &rows)
    }

    fn with_rows(
        name: String,
        records: Vec<JournalRecord>,
        provenance: Provenance,
        rows: &[u64],
    ) -> Result<Self> {
        let mut seen = HashSet::with_capacity(records.len());
        for (rec, &row) in records.iter().zip(rows) {
            if rec.p == 0 {
                return Err(Error::Validation {
                    row,
                    rule: "P ≥ 1".into(),
                });
            }
            if !seen.insert(rec.id.as_str()) {
                return Err(Error::DuplicateId {
                    id: rec.id.clone(),
                    row,
                });
            }
            if provenance == Provenance::Observed {
                if let Some(rule) = rec.violations().first() {
                    return Err(Error::Validation {
                        row,
                        rule: rule.to_string(),
                    });
                }
            }
        }
        Ok(Dataset {
            name,
            records,
            provenance,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn records(&self) -> &[JournalRecord] {
        &self.records
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Consistency rules broken by records of a synthetic dataset.
    pub fn consistency_warnings(&self) -> Vec<ConsistencyWarning> {
        self.records
            .iter()
            .enumerate()
            .flat_map(|(i, rec)| {
                rec.violations().into_iter().map(move |rule| ConsistencyWarning {
                    row: i as u64 + 1,
                    id: rec.id.clone(),
                    rule,
                })
            })
            .collect()
    }

    /// Writes the dataset in the same format `parse_dataset` reads.
    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "id,h,P,C")?;
        for rec in &self.records {
            writeln!(writer, "{},{},{},{}", rec.id, rec.h, rec.p, rec.c)?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Reads a dataset from delimited text. Row numbers in errors are 1-based
/// line numbers of the source, so the header is line 1.
pub fn parse_dataset<R: Read>(mut source: R, name: &str, provenance: Provenance) -> Result<Dataset> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i as u64 + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (header_row, header) = lines.next().ok_or_else(|| Error::Parse {
        row: 1,
        message: "missing header".into(),
    })?;
    let headers: Vec<&str> = header.split(',').map(str::trim).collect();
    let column = |label: &str| -> Result<usize> {
        headers.iter().position(|&h| h == label).ok_or_else(|| Error::Parse {
            row: header_row,
            message: format!("missing column {label:?}"),
        })
    };
    let (id_col, h_col, p_col, c_col) = (column("id")?, column("h")?, column("P")?, column("C")?);

    let mut records = Vec::new();
    let mut rows = Vec::new();
    for (row, line) in lines {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != headers.len() {
            return Err(Error::Parse {
                row,
                message: format!("expected {} fields, found {}", headers.len(), fields.len()),
            });
        }
        let int = |col: usize, label: &str| -> Result<u64> {
            let raw = fields[col];
            raw.parse::<u64>().map_err(|_| Error::Parse {
                row,
                message: format!("{label} must be a non-negative integer, got {raw:?}"),
            })
        };
        if fields[id_col].is_empty() {
            return Err(Error::Parse {
                row,
                message: "empty id".into(),
            });
        }
        records.push(JournalRecord {
            id: fields[id_col].to_string(),
            h: int(h_col, "h")?,
            p: int(p_col, "P")?,
            c: int(c_col, "C")?,
        });
        rows.push(row);
    }
    Dataset::with_rows(name.to_string(), records, provenance, &rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ColumnSummary {
    pub min: u64,
    pub max: u64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetSummary {
    pub n: usize,
    pub h: ColumnSummary,
    pub p: ColumnSummary,
    pub c: ColumnSummary,
}

pub fn dataset_summary(d: &Dataset) -> Result<DatasetSummary> {
    if d.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let column = |get: fn(&JournalRecord) -> u64| {
        let values = d.records.iter().map(get);
        let sum: u128 = values.clone().map(u128::from).sum();
        ColumnSummary {
            min: values.clone().min().unwrap_or(0),
            max: values.max().unwrap_or(0),
            mean: sum as f64 / d.len() as f64,
        }
    };
    Ok(DatasetSummary {
        n: d.len(),
        h: column(|r| r.h),
        p: column(|r| r.p),
        c: column(|r| r.c),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(text: &str) -> Result<Dataset> {
        parse_dataset(text.as_bytes(), "test", Provenance::Observed)
    }

    #[test]
    fn accepts_consistent_row() {
        let d = parse("id,h,P,C\nJ1,10,100,400\n").unwrap();
        assert_eq!(d.records(), &[JournalRecord::new("J1", 10, 100, 400)]);
    }

    #[test]
    fn rejects_h_above_p() {
        let err = parse("id,h,P,C\nJ2,10,5,400\n").unwrap_err();
        assert!(err.to_string().contains("h ≤ P violated"), "{err}");
        assert!(matches!(err, Error::Validation { row: 2, .. }));
    }

    #[test]
    fn rejects_h_squared_above_c() {
        let err = parse("id,h,P,C\nJ3,10,100,50\n").unwrap_err();
        assert!(err.to_string().contains("h² ≤ C violated"), "{err}");
    }

    #[test]
    fn synthetic_inconsistency_is_a_warning() {
        let d = parse_dataset("id,h,P,C\nJ3,10,100,50\n".as_bytes(), "s", Provenance::Synthetic)
            .unwrap();
        let w = d.consistency_warnings();
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].rule, Consistency::HSquaredAtMostC);
    }

    #[test]
    fn parse_errors_name_the_row() {
        let err = parse("id,h,P,C\nA,1,2,3\n\nB,x,2,3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { row: 4, .. }), "{err}");
        let err = parse("id,h,P\nA,1,2\n").unwrap_err();
        assert!(err.to_string().contains("missing column \"C\""));
        let err = parse("id,h,P,C\nA,1,2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { row: 2, .. }));
        let err = parse("id,h,P,C\nA,-1,2,3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn comma_in_id_is_rejected() {
        let err = parse("id,h,P,C\n\"Acta, Oecol\",1,2,3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { row: 2, .. }), "{err}");
    }

    #[test]
    fn blank_lines_and_column_order() {
        let d = parse("C,P,h,id\n\n400,100,10,J1\n   \n9,3,3,J2\n").unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.records()[1], JournalRecord::new("J2", 3, 3, 9));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let err = parse("id,h,P,C\nA,1,2,3\nA,1,2,3\n").unwrap_err();
        assert!(matches!(err, Error::DuplicateId { row: 3, .. }));
    }

    #[test]
    fn zero_publications_rejected_even_when_synthetic() {
        let err = parse_dataset("id,h,P,C\nA,0,0,3\n".as_bytes(), "s", Provenance::Synthetic)
            .unwrap_err();
        assert!(err.to_string().contains("P ≥ 1"));
    }

    #[test]
    fn summary_single_record() {
        let d = Dataset::new("x", vec![JournalRecord::new("a", 5, 10, 50)], Provenance::Observed)
            .unwrap();
        let s = dataset_summary(&d).unwrap();
        assert_eq!(s.n, 1);
        assert_eq!((s.h.min, s.h.max, s.h.mean), (5, 5, 5.0));
        assert_eq!((s.p.min, s.p.max, s.p.mean), (10, 10, 10.0));
        assert_eq!((s.c.min, s.c.max, s.c.mean), (50, 50, 50.0));
    }

    #[test]
    fn summary_mean_h() {
        let recs = [5, 10, 15]
            .iter()
            .enumerate()
            .map(|(i, &h)| JournalRecord::new(format!("j{i}"), h, 100, 1000))
            .collect();
        let d = Dataset::new("x", recs, Provenance::Observed).unwrap();
        assert_eq!(dataset_summary(&d).unwrap().h.mean, 10.0);
    }

    #[test]
    fn summary_of_empty_dataset_fails() {
        let d = parse("id,h,P,C\n").unwrap();
        assert!(matches!(dataset_summary(&d), Err(Error::EmptyDataset)));
    }

    fn record_strategy() -> impl Strategy<Value = (u64, u64, u64)> {
        (0u64..60, 1u64..80, 0u64..4000)
    }

    proptest! {
        #[test]
        fn observed_acceptance_iff_consistent(rows in prop::collection::vec(record_strategy(), 1..40)) {
            for (i, &(h, p, c)) in rows.iter().enumerate() {
                let text = format!("id,h,P,C\nr{i},{h},{p},{c}\n");
                let accepted = parse(&text).is_ok();
                prop_assert_eq!(accepted, h <= p && h * h <= c);
            }
        }

        #[test]
        fn round_trip(rows in prop::collection::vec(record_strategy(), 0..30)) {
            let recs = rows
                .iter()
                .enumerate()
                .map(|(i, &(h, p, c))| JournalRecord::new(format!("J{i}"), h, p, c))
                .collect();
            let d = Dataset::new("rt", recs, Provenance::Synthetic).unwrap();
            let mut buf = Vec::new();
            d.write_csv(&mut buf).unwrap();
            let back = parse_dataset(buf.as_slice(), "rt", Provenance::Synthetic).unwrap();
            prop_assert_eq!(back, d);
        }

        #[test]
        fn summary_matches_brute_force(rows in prop::collection::vec(record_strategy(), 1..50)) {
            let recs: Vec<_> = rows
                .iter()
                .enumerate()
                .map(|(i, &(h, p, c))| JournalRecord::new(format!("J{i}"), h, p, c))
                .collect();
            let d = Dataset::new("s", recs, Provenance::Synthetic).unwrap();
            let s = dataset_summary(&d).unwrap();
            let n = rows.len() as f64;
            let mut mh = 0.0;
            let mut mp = 0.0;
            let mut mc = 0.0;
            for &(h, p, c) in &rows {
                mh += h as f64 / n;
                mp += p as f64 / n;
                mc += c as f64 / n;
            }
            for (got, want) in [(s.h.mean, mh), (s.p.mean, mp), (s.c.mean, mc)] {
                prop_assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0));
            }
            prop_assert_eq!(s.p.max, rows.iter().map(|r| r.1).max().unwrap());
        }
    }
}
