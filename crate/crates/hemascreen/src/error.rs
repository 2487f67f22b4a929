use std::io;
use std::path::PathBuf;

use hemascreen_core::Error as CoreError;

/// Failures while reading the source CSV or the column mapping.
#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: io::Error },
    #[error("invalid column mapping {}: {message}", path.display())]
    Mapping { path: PathBuf, message: String },
    #[error("invalid column mapping: {0}")]
    MappingValue(String),
    #[error("CSV header lacks mapped column(s): {}", missing.join(", "))]
    MalformedHeader { missing: Vec<String> },
    #[error("data row {row}: cannot parse {column} value {value:?}")]
    MalformedRow { row: usize, column: String, value: String },
    #[error("data row {row}: more than one admission flag is set")]
    ConflictingAdmission { row: usize },
    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
}

/// Command failure, grouped by exit code.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("configuration: {0}")]
    Config(String),
    #[error("cohort {cohort}: {source}")]
    Cohort { cohort: String, source: CoreError },
    #[error("statistics for {cohort}: {source}")]
    Stats { cohort: String, source: CoreError },
    #[error("model {model}: {source}")]
    Model { model: String, source: CoreError },
    #[error("cannot write {}: {source}", path.display())]
    Output { path: PathBuf, source: io::Error },
}

impl Error {
    /// 2 input, 3 statistics, 4 modeling, 1 output.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Ingest(_) | Error::Config(_) | Error::Cohort { .. } => 2,
            Error::Stats { .. } => 3,
            Error::Model { .. } => 4,
            Error::Output { .. } => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
