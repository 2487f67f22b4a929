//! Fold-parallel drivers. Results are merged in plan order, so output equals
//! the serial harness bit for bit.

use hemascreen_core::metrics::{check_plan, evaluate_fold, report_meta, summarize, train_fold, wrap_fold_error, EvalReport};
use hemascreen_core::models::{normalize_importance, raw_importance, Importance, ModelSpec};
use hemascreen_core::resample::{FoldId, FoldPlan};
use hemascreen_core::seed::{self, tag};
use hemascreen_core::{Cohort, Result};
use rayon::prelude::*;

pub fn cross_validate(cohort: &Cohort, spec: &ModelSpec, plan: &FoldPlan, smote: bool) -> Result<EvalReport> {
    check_plan(cohort, plan)?;
    let x = cohort.design_matrix();
    let labels = cohort.labels();
    let ids: Vec<FoldId> = plan.folds().collect();
    let folds = ids
        .par_iter()
        .map(|&id| evaluate_fold(&x, &labels, cohort.feature_manifest(), plan, id, spec, smote))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(report_meta(cohort, spec, plan, smote), folds))
}

/// Importance measured on each held-out fold, averaged over folds, then scaled to a maximum of 100.
pub fn heldout_importance(cohort: &Cohort, spec: &ModelSpec, plan: &FoldPlan, smote: bool) -> Result<Vec<Importance>> {
    check_plan(cohort, plan)?;
    let x = cohort.design_matrix();
    let labels = cohort.labels();
    let manifest = cohort.feature_manifest();
    let ids: Vec<FoldId> = plan.folds().collect();
    let per_fold = ids
        .par_iter()
        .map(|&id| {
            let run = || {
                let fm = train_fold(&x, &labels, manifest, plan, id, spec, smote)?;
                let x_test = x.select_rows(&fm.test_indices);
                let l_test: Vec<bool> = fm.test_indices.iter().map(|&i| labels[i]).collect();
                let s = seed::derive(plan.master_seed, &[tag::PERMUTATION, id.repeat as u64, id.fold as u64]);
                raw_importance(&fm.model, &x_test, &l_test, s)
            };
            run().map_err(|e| wrap_fold_error(id, e))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut mean = vec![0.0; manifest.len()];
    for raw in &per_fold {
        for (m, v) in mean.iter_mut().zip(raw) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= per_fold.len() as f64;
    }
    Ok(normalize_importance(manifest, &mean))
}
