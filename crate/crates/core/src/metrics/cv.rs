//! Cross-validated evaluation: per fold, optionally SMOTE-balance the training
//! part, train, pick a Youden cutoff on the training rows, and score the
//! untouched test rows.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{auc, metrics_at, optimal_cutoff, ThresholdMetrics};
use crate::dataset::{Cohort, Feature};
use crate::error::{Error, Result};
use crate::math;
use crate::matrix::Matrix;
use crate::models::{self, ModelSpec, TrainedModel};
use crate::resample::{balance_training_fold, FoldId, FoldPlan, Origin, DEFAULT_K_NEIGHBORS};
use crate::seed::{self, tag};

pub const EVAL_REPORT_SCHEMA: &str = "hemascreen.eval-report/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub repeat: usize,
    pub fold: usize,
    pub auc: f64,
    /// Youden-optimal threshold chosen on the (original) training rows.
    pub cutoff: f64,
    pub at_cutoff: ThresholdMetrics,
    pub at_half: ThresholdMetrics,
    pub n_train: usize,
    pub n_synthetic: usize,
    /// Record indices of the test rows, into the cohort.
    pub test_indices: Vec<usize>,
    pub test_scores: Vec<f64>,
    pub test_labels: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    /// Sample standard deviation over folds (0 for a single fold).
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

impl MetricSummary {
    pub fn of(values: &[f64]) -> Self {
        MetricSummary {
            mean: math::mean(values),
            sd: math::sample_sd(values),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub auc: MetricSummary,
    pub sensitivity: MetricSummary,
    pub specificity: MetricSummary,
    pub accuracy: MetricSummary,
    pub sensitivity_at_half: MetricSummary,
    pub specificity_at_half: MetricSummary,
    pub accuracy_at_half: MetricSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub cohort: String,
    pub cohort_digest: String,
    pub n_records: usize,
    pub n_positive: usize,
    pub model: String,
    pub spec: ModelSpec,
    pub master_seed: u64,
    pub k: usize,
    pub repeats: usize,
    pub smote: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema: String,
    pub meta: ReportMeta,
    pub folds: Vec<FoldResult>,
    pub aggregate: Aggregate,
}

impl EvalReport {
    /// Fold with the lowest AUC (first such fold on ties).
    pub fn worst_fold(&self) -> Option<&FoldResult> {
        self.folds.iter().fold(None, |w: Option<&FoldResult>, f| match w {
            Some(b) if b.auc <= f.auc => Some(b),
            _ => Some(f),
        })
    }
}

/// Attaches the fold position to an error.
pub fn wrap(id: FoldId, e: Error) -> Error {
    Error::Fold { repeat: id.repeat, fold: id.fold, source: Box::new(e) }
}

/// Model trained on the training part of one fold.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldModel {
    pub model: TrainedModel,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub n_synthetic: usize,
}

/// Trains `spec` on the training rows of fold `id`, SMOTE-balanced when `smote` is set.
/// Synthetic rows never leave this function; the test rows are untouched.
pub fn train_fold(
    x: &Matrix,
    labels: &[bool],
    manifest: &[Feature],
    plan: &FoldPlan,
    id: FoldId,
    spec: &ModelSpec,
    smote: bool,
) -> Result<FoldModel> {
    let train_idx = plan.train_indices(id);
    let test_idx = plan.test_indices(id);
    let x_train = x.select_rows(&train_idx);
    let l_train: Vec<bool> = train_idx.iter().map(|&i| labels[i]).collect();
    let path = [id.repeat as u64, id.fold as u64];

    let (fit_x, fit_l, n_synthetic) = if smote {
        let s = seed::derive(plan.master_seed, &[tag::SMOTE, path[0], path[1]]);
        let b = balance_training_fold(&x_train, &l_train, DEFAULT_K_NEIGHBORS, s)?;
        let n_syn = b.origin.iter().filter(|o| matches!(o, Origin::Synthetic(..))).count();
        (b.x, b.labels, n_syn)
    } else {
        (x_train, l_train, 0)
    };

    let train_seed = seed::derive(plan.master_seed, &[tag::TRAIN, path[0], path[1]]);
    let model = models::train(spec, &fit_x, &fit_l, manifest, train_seed)?;
    Ok(FoldModel { model, train_indices: train_idx, test_indices: test_idx, n_synthetic })
}

/// Evaluates one fold. `x` has columns in `manifest` order.
pub fn evaluate_fold(
    x: &Matrix,
    labels: &[bool],
    manifest: &[Feature],
    plan: &FoldPlan,
    id: FoldId,
    spec: &ModelSpec,
    smote: bool,
) -> Result<FoldResult> {
    let run = || -> Result<FoldResult> {
        let fm = train_fold(x, labels, manifest, plan, id, spec, smote)?;
        let l_train: Vec<bool> = fm.train_indices.iter().map(|&i| labels[i]).collect();
        let l_test: Vec<bool> = fm.test_indices.iter().map(|&i| labels[i]).collect();

        // cutoff from the original training rows only
        let train_scores = fm.model.predict_matrix(&x.select_rows(&fm.train_indices));
        let cutoff = optimal_cutoff(&train_scores, &l_train)?;
        let test_scores = fm.model.predict_matrix(&x.select_rows(&fm.test_indices));
        Ok(FoldResult {
            repeat: id.repeat,
            fold: id.fold,
            auc: auc(&test_scores, &l_test)?,
            cutoff,
            at_cutoff: metrics_at(&test_scores, &l_test, cutoff)?,
            at_half: metrics_at(&test_scores, &l_test, 0.5)?,
            n_train: fm.train_indices.len(),
            n_synthetic: fm.n_synthetic,
            test_indices: fm.test_indices,
            test_scores,
            test_labels: l_test,
        })
    };
    run().map_err(|e| wrap(id, e))
}

/// Builds the report from fold results (which must be in plan order).
pub fn summarize(meta: ReportMeta, folds: Vec<FoldResult>) -> EvalReport {
    let col = |f: fn(&FoldResult) -> f64| MetricSummary::of(&folds.iter().map(f).collect::<Vec<_>>());
    let aggregate = Aggregate {
        auc: col(|f| f.auc),
        sensitivity: col(|f| f.at_cutoff.sensitivity),
        specificity: col(|f| f.at_cutoff.specificity),
        accuracy: col(|f| f.at_cutoff.accuracy),
        sensitivity_at_half: col(|f| f.at_half.sensitivity),
        specificity_at_half: col(|f| f.at_half.specificity),
        accuracy_at_half: col(|f| f.at_half.accuracy),
    };
    EvalReport { schema: EVAL_REPORT_SCHEMA.into(), meta, folds, aggregate }
}

pub fn report_meta(cohort: &Cohort, spec: &ModelSpec, plan: &FoldPlan, smote: bool) -> ReportMeta {
    ReportMeta {
        cohort: cohort.filter_name(),
        cohort_digest: cohort.provenance().source_digest.clone(),
        n_records: cohort.len(),
        n_positive: cohort.positives(),
        model: spec.name(),
        spec: spec.clone(),
        master_seed: plan.master_seed,
        k: plan.k,
        repeats: plan.repeats,
        smote,
    }
}

/// Rejects a plan built over a different number of records than `cohort`.
pub fn check_plan(cohort: &Cohort, plan: &FoldPlan) -> Result<()> {
    if plan.n_records() != cohort.len() {
        return Err(Error::DimensionMismatch { expected: cohort.len(), got: plan.n_records() });
    }
    Ok(())
}

/// Runs every fold of `plan` serially, in plan order.
pub fn cross_validate(cohort: &Cohort, spec: &ModelSpec, plan: &FoldPlan, smote: bool) -> Result<EvalReport> {
    check_plan(cohort, plan)?;
    let x = cohort.design_matrix();
    let labels = cohort.labels();
    let folds = plan
        .folds()
        .map(|id| evaluate_fold(&x, &labels, cohort.feature_manifest(), plan, id, spec, smote))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(report_meta(cohort, spec, plan, smote), folds))
}
