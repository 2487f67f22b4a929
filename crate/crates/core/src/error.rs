use alloc::string::String;

use crate::dataset::Location;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("no records match the location filter {0:?}")]
    EmptyCohort(alloc::vec::Vec<Location>),
    #[error("feature has zero standard deviation")]
    DegenerateFeature,
    #[error("at least two values are required, got {0}")]
    TooFewValues(usize),
    #[error("non-finite value in input")]
    NonFiniteInput,
    #[error("sample is empty")]
    EmptySample,
    #[error("cohort contains a single class only")]
    SingleClassCohort,
    #[error("labels contain a single class only")]
    SingleClass,
    #[error("class {class} has {count} members, fewer than k = {k}")]
    TooFewPerClass { class: &'static str, count: usize, k: usize },
    #[error("invalid fold configuration: {0}")]
    BadFoldConfig(&'static str),
    #[error("minority class has {0} members, SMOTE needs at least 2")]
    TooFewMinority(usize),
    #[error("k_neighbors = {k} invalid for a minority of size {minority}")]
    BadNeighborCount { k: usize, minority: usize },
    #[error("training diverged (non-finite value) at {stage} {index}")]
    NonFinite { stage: &'static str, index: usize },
    #[error("invalid hyperparameter: {0}")]
    BadHyperparameter(String),
    #[error("record lacks feature {0} required by the model manifest")]
    ManifestMismatch(String),
    #[error("variable importance is not supported for {0} models")]
    UnsupportedModel(&'static str),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("duplicate patient id {0}")]
    DuplicatePatient(String),
    #[error("fold {fold} of repeat {repeat} failed: {source}")]
    Fold { repeat: usize, fold: usize, source: alloc::boxed::Box<Error> },
    #[error("unknown name {0:?}")]
    UnknownName(String),
}
