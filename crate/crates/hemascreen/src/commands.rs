//! The five subcommands. Each returns the paths it wrote, in write order.

use std::path::PathBuf;

use hemascreen_core::dataset::{cohort_summary, select_cohort, CohortSummary};
use hemascreen_core::metrics::{EvalReport, MetricSummary};
use hemascreen_core::models::{self, derived_score, Importance, ModelSpec, ScoreVariant};
use hemascreen_core::resample::{balance_training_fold, stratified_kfold, FoldPlan, DEFAULT_K_NEIGHBORS};
use hemascreen_core::seed::{self, tag};
use hemascreen_core::stats::{screen_values, significance_table, ScreenRow, SignificanceTable};
use hemascreen_core::{Cohort, Error as CoreError, Feature};
use serde::Serialize;

use crate::config::{CohortChoice, RunConfig};
use crate::error::{Error, IngestError, Result};
use crate::ingest::{detect_mapping, parse_dataset, write_records, IngestReport, ParsedDataset};
use crate::mapping::ColumnMapping;
use crate::output::{Artifacts, SavedModel, MODEL_SCHEMA};
use crate::{parallel, svg};

pub const SUMMARY_SCHEMA: &str = "hemascreen.summary/1";
pub const SIGNIFICANCE_SCHEMA: &str = "hemascreen.significance/1";
pub const COMPARISON_SCHEMA: &str = "hemascreen.comparison/1";
pub const IMPORTANCE_SCHEMA: &str = "hemascreen.importance/1";

/// Reads the data file with the configured mapping, or one detected from its header.
pub fn load_dataset(cfg: &RunConfig) -> Result<ParsedDataset> {
    let path = cfg.data_path()?;
    let bytes = std::fs::read(path).map_err(|source| IngestError::Read { path: path.to_path_buf(), source })?;
    let mapping = match &cfg.mapping {
        Some(p) => ColumnMapping::load(p)?,
        None => detect_mapping(&bytes),
    };
    Ok(parse_dataset(bytes.as_slice(), &mapping)?)
}

fn select(parsed: &ParsedDataset, choice: CohortChoice) -> Result<Cohort, CoreError> {
    Ok(select_cohort(&parsed.records, choice.locations())?.with_source_digest(parsed.digest.clone()))
}

#[derive(Serialize)]
struct IngestOutput<'a> {
    #[serde(flatten)]
    report: IngestReport,
    cohorts: Vec<CohortFile<'a>>,
}

#[derive(Serialize)]
struct CohortFile<'a> {
    cohort: &'a str,
    file: String,
    records: usize,
    positive: usize,
}

pub fn ingest(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let parsed = load_dataset(cfg)?;
    let mut out = Artifacts::new(&cfg.out);
    let mut buf = Vec::new();
    write_records(&mut buf, &parsed.records).map_err(|e| Error::Ingest(e.into()))?;
    out.bytes("records.csv", &buf)?;

    let choices = match cfg.cohort {
        Some(c) => vec![c],
        None => CohortChoice::ALL.to_vec(),
    };
    let mut cohorts = Vec::new();
    for choice in choices {
        let records = match select(&parsed, choice) {
            Ok(c) => c.records().to_vec(),
            // an unrequested empty cohort still gets its (header-only) file
            Err(CoreError::EmptyCohort(_)) if cfg.cohort.is_none() => Vec::new(),
            Err(source) => return Err(Error::Cohort { cohort: choice.name().into(), source }),
        };
        let file = format!("cohort_{}.csv", choice.name());
        let mut buf = Vec::new();
        write_records(&mut buf, &records).map_err(|e| Error::Ingest(e.into()))?;
        out.bytes(&file, &buf)?;
        let positive = records.iter().filter(|r| r.is_positive()).count();
        cohorts.push(CohortFile { cohort: choice.name(), file, records: records.len(), positive });
    }
    out.json("ingest_report.json", &IngestOutput { report: parsed.report(), cohorts })?;
    Ok(out.written)
}

#[derive(Serialize)]
struct SummaryOutput {
    schema: &'static str,
    source_digest: String,
    ingest: IngestReport,
    tables: CohortSummary,
}

pub fn summary(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let parsed = load_dataset(cfg)?;
    let mut out = Artifacts::new(&cfg.out);
    out.json(
        "summary.json",
        &SummaryOutput {
            schema: SUMMARY_SCHEMA,
            source_digest: parsed.digest.clone(),
            ingest: parsed.report(),
            tables: cohort_summary(&parsed.records),
        },
    )?;
    Ok(out.written)
}

#[derive(Serialize)]
struct CohortSignificance {
    cohort: String,
    n_records: usize,
    n_positive: usize,
    table: SignificanceTable,
    /// Derived scores (monocytes minus leukocytes, ...), positive vs negative.
    derived: Vec<ScreenRow>,
}

#[derive(Serialize)]
struct SignificanceOutput {
    schema: &'static str,
    source_digest: String,
    alpha: f64,
    cohorts: Vec<CohortSignificance>,
}

fn screen_cohort(parsed: &ParsedDataset, choice: CohortChoice) -> Result<CohortSignificance, CoreError> {
    let cohort = select(parsed, choice)?;
    let table = significance_table(cohort.records())?;
    let labels = cohort.labels();
    let derived = ScoreVariant::ALL
        .iter()
        .map(|&v| {
            let scores = cohort.records().iter().map(|r| derived_score(r, v)).collect::<Result<Vec<f64>, _>>()?;
            screen_values(v.name(), &scores, &labels)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CohortSignificance {
        cohort: choice.name().into(),
        n_records: cohort.len(),
        n_positive: cohort.positives(),
        table,
        derived,
    })
}

pub fn stats(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let parsed = load_dataset(cfg)?;
    let choices = match cfg.cohort {
        Some(c) => vec![c],
        None => vec![CohortChoice::Community, CohortChoice::RegularWard],
    };
    let cohorts = choices
        .into_iter()
        .map(|c| screen_cohort(&parsed, c).map_err(|source| Error::Stats { cohort: c.name().into(), source }))
        .collect::<Result<Vec<_>>>()?;

    let mut out = Artifacts::new(&cfg.out);
    if cfg.plots {
        let features: Vec<(String, Vec<&ScreenRow>)> = cohorts
            .iter()
            .map(|c| (c.cohort.clone(), Feature::ALL.iter().filter_map(|&f| c.table.row(f)).collect()))
            .collect();
        out.bytes("fig1_boxplots.svg", svg::boxplot_grid("Blood counts, positive vs negative", &features).as_bytes())?;
        let derived: Vec<(String, Vec<&ScreenRow>)> =
            cohorts.iter().map(|c| (c.cohort.clone(), c.derived.iter().collect())).collect();
        out.bytes("fig5_derived.svg", svg::boxplot_grid("Derived scores", &derived).as_bytes())?;
    }
    out.json(
        "significance.json",
        &SignificanceOutput { schema: SIGNIFICANCE_SCHEMA, source_digest: parsed.digest.clone(), alpha: 0.05, cohorts },
    )?;
    Ok(out.written)
}

fn plan_for(cohort: &Cohort, cfg: &RunConfig, model: &str) -> Result<FoldPlan> {
    stratified_kfold(&cohort.labels(), cfg.folds, cfg.repeats, cfg.seed)
        .map_err(|source| Error::Model { model: model.into(), source })
}

/// Fits `spec` on the whole cohort (SMOTE-balanced when requested).
pub fn train_final(cohort: &Cohort, spec: &ModelSpec, cfg: &RunConfig) -> Result<SavedModel, CoreError> {
    let mut x = cohort.design_matrix();
    let mut labels = cohort.labels();
    if cfg.smote {
        let b = balance_training_fold(&x, &labels, DEFAULT_K_NEIGHBORS, seed::derive(cfg.seed, &[tag::SMOTE]))?;
        x = b.x;
        labels = b.labels;
    }
    let model = models::train(spec, &x, &labels, cohort.feature_manifest(), seed::derive(cfg.seed, &[tag::TRAIN]))?;
    Ok(SavedModel {
        schema: MODEL_SCHEMA.into(),
        cohort: cohort.filter_name(),
        cohort_digest: cohort.provenance().source_digest.clone(),
        master_seed: cfg.seed,
        smote: cfg.smote,
        model,
    })
}

#[derive(Serialize)]
struct ComparisonRow {
    model: String,
    sensitivity: MetricSummary,
    specificity: MetricSummary,
    accuracy: MetricSummary,
    auc: MetricSummary,
    accuracy_at_half: MetricSummary,
}

#[derive(Serialize)]
struct Comparison {
    schema: &'static str,
    cohort: String,
    master_seed: u64,
    k: usize,
    repeats: usize,
    smote: bool,
    /// Sensitivity, specificity and accuracy at the training-selected Youden cutoff.
    rows: Vec<ComparisonRow>,
}

/// Cross-validated reports, in the requested model order.
pub fn evaluate_reports(cohort: &Cohort, cfg: &RunConfig, names: &[&str]) -> Result<Vec<EvalReport>> {
    names
        .iter()
        .map(|&name| {
            let spec = cfg.model_spec(name)?;
            let plan = plan_for(cohort, cfg, name)?;
            parallel::cross_validate(cohort, &spec, &plan, cfg.smote)
                .map_err(|source| Error::Model { model: name.into(), source })
        })
        .collect()
}

pub fn evaluate(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let parsed = load_dataset(cfg)?;
    let choice = cfg.cohort.unwrap_or(CohortChoice::Community);
    let cohort = select(&parsed, choice).map_err(|source| Error::Cohort { cohort: choice.name().into(), source })?;
    let names = cfg.model_names(&ModelSpec::names());
    let c = choice.name();
    let mut out = Artifacts::new(&cfg.out);

    let plan = plan_for(&cohort, cfg, names.first().copied().unwrap_or("plan"))?;
    out.json(&format!("{c}_folds.json"), &plan)?;

    let mut rows = Vec::new();
    for name in &names {
        let report = evaluate_reports(&cohort, cfg, &[name])?.pop().expect("one report");
        out.json(&format!("{c}_{name}_report.json"), &report)?;
        if cfg.plots {
            out.bytes(&format!("{c}_{name}_roc.svg"), svg::roc_plot(&report).as_bytes())?;
            out.bytes(&format!("{c}_{name}_confusion.svg"), svg::confusion_plot(&report).as_bytes())?;
        }
        let spec = cfg.model_spec(name)?;
        let saved = train_final(&cohort, &spec, cfg).map_err(|source| Error::Model { model: name.to_string(), source })?;
        out.json(&format!("{c}_{name}_model.json"), &saved)?;
        let a = report.aggregate;
        rows.push(ComparisonRow {
            model: name.to_string(),
            sensitivity: a.sensitivity,
            specificity: a.specificity,
            accuracy: a.accuracy,
            auc: a.auc,
            accuracy_at_half: a.accuracy_at_half,
        });
    }
    out.json(
        &format!("{c}_comparison.json"),
        &Comparison {
            schema: COMPARISON_SCHEMA,
            cohort: c.into(),
            master_seed: cfg.seed,
            k: cfg.folds,
            repeats: cfg.repeats,
            smote: cfg.smote,
            rows,
        },
    )?;
    Ok(out.written)
}

#[derive(Serialize)]
struct ImportanceOutput {
    schema: &'static str,
    cohort: String,
    model: String,
    method: &'static str,
    master_seed: u64,
    k: usize,
    repeats: usize,
    smote: bool,
    importance: Vec<Importance>,
}

pub fn importance(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let names = cfg.model_names(&["rf", "glmnet"]);
    let mut specs = Vec::new();
    for name in &names {
        let spec = cfg.model_spec(name)?;
        let unsupported = match spec {
            ModelSpec::Ann(_) => Some("ann"),
            ModelSpec::DerivedScore { .. } => Some("derived-score"),
            _ => None,
        };
        if let Some(kind) = unsupported {
            return Err(Error::Model { model: name.to_string(), source: CoreError::UnsupportedModel(kind) });
        }
        specs.push(spec);
    }

    let parsed = load_dataset(cfg)?;
    let choice = cfg.cohort.unwrap_or(CohortChoice::Community);
    let cohort = select(&parsed, choice).map_err(|source| Error::Cohort { cohort: choice.name().into(), source })?;
    let c = choice.name();
    let mut out = Artifacts::new(&cfg.out);
    for (name, spec) in names.iter().zip(&specs) {
        let plan = plan_for(&cohort, cfg, name)?;
        let importance = parallel::heldout_importance(&cohort, spec, &plan, cfg.smote)
            .map_err(|source| Error::Model { model: name.to_string(), source })?;
        let method = match spec {
            ModelSpec::RandomForest(_) => "held-out permutation AUC drop, mean over folds",
            _ => "absolute standardized coefficient, mean over folds",
        };
        if cfg.plots {
            let title = format!("Variable importance, {name} on {c}");
            out.bytes(&format!("{c}_{name}_importance.svg"), svg::importance_plot(&title, &importance).as_bytes())?;
        }
        out.json(
            &format!("{c}_{name}_importance.json"),
            &ImportanceOutput {
                schema: IMPORTANCE_SCHEMA,
                cohort: c.into(),
                model: name.to_string(),
                method,
                master_seed: cfg.seed,
                k: cfg.folds,
                repeats: cfg.repeats,
                smote: cfg.smote,
                importance,
            },
        )?;
    }
    Ok(out.written)
}
