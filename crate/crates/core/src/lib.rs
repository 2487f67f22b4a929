//! Numerical core for screening SARS-CoV-2 from full blood counts.
//!
//! Everything here is pure computation over in-memory data and builds without
//! `std` (only `alloc`). File formats, plotting and the command-line driver
//! live in the `hemascreen` crate.
//!
//! Module map:
//!
//! - [`dataset`]: blood-count records, cohorts, standardization, Table-1/4 style summaries
//! - [`stats`]: Wilcoxon rank-sum screening and box-plot summaries
//! - [`resample`]: stratified k-fold plans and SMOTE oversampling
//! - [`models`]: elastic-net logistic regression, random forest, feed-forward ANN,
//!   derived-score logistic regression, variable importance
//! - [`metrics`]: AUC, ROC, threshold metrics and the cross-validation harness

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dataset;
pub mod error;
mod serde_ext;
pub mod math;
pub mod matrix;
pub mod metrics;
pub mod models;
pub mod resample;
pub mod seed;
pub mod stats;

pub use dataset::{BloodCountRecord, Cohort, Feature, Label, Location, FEATURE_COUNT};
pub use error::{Error, Result};
pub use matrix::Matrix;
