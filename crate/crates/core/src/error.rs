use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A row could not be read as a record.
    #[error("row {row}: {message}")]
    Parse { row: u64, message: String },

    /// A record violates a bibliometric consistency rule.
    #[error("row {row}: {rule} violated")]
    Validation { row: u64, rule: String },

    #[error("duplicate id {id:?} at row {row}")]
    DuplicateId { id: String, row: u64 },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("domain error: {0}")]
    Domain(String),

    /// The model mean over- or underflowed the positive finite reals.
    #[error("model mean is not a positive finite number ({0})")]
    NonFinite(f64),

    #[error("record {id}: {source}")]
    Record {
        id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("no finite starting point found after {attempts} attempts")]
    Initialization { attempts: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("need at least {needed} pooled draws, got {got}")]
    TooFewDraws { needed: usize, got: usize },

    #[error("chain layout {found:?} does not match expected {expected:?}")]
    LayoutMismatch {
        expected: Vec<String>,
        found: Vec<String>,
    },

    #[error("R-hat needs at least two chains")]
    SingleChain,

    #[error("reports were fitted to different datasets: {0:?} and {1:?}")]
    MixedDatasets(String, String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
