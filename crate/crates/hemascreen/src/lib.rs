//! File formats, reports, plots and the batch driver around `hemascreen-core`.
//!
//! The `hemascreen` binary exposes five subcommands (`ingest`, `summary`,
//! `stats`, `evaluate`, `importance`). Each maps to a function in
//! [`commands`] taking a [`RunConfig`], so the pipeline can also be driven
//! from Rust. Exit codes: 2 input, 3 statistics, 4 modeling, 1 output.

pub mod commands;
pub mod config;
pub mod error;
pub mod ingest;
pub mod mapping;
pub mod output;
pub mod parallel;
pub mod svg;

pub use config::{CohortChoice, RunConfig};
pub use error::{Error, IngestError, Result};
pub use mapping::ColumnMapping;
