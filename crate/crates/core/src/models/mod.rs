//! The four classifier families and a uniform scoring interface over them.

pub mod ann;
pub mod derived;
pub mod elastic_net;
pub mod forest;

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

pub use ann::{train_ann, Activation, AnnConfig, AnnModel};
pub use derived::{derived_score, train_logistic_scalar, DerivedScoreModel, ScalarLogistic, ScoreVariant};
pub use elastic_net::{train_elastic_net, ElasticNetConfig, ElasticNetModel, LambdaSelection};
pub use forest::{train_random_forest, ForestConfig, RandomForestModel};

use crate::dataset::{Feature, FeatureSource};
use crate::error::{Error, Result};
use crate::math::clamp_prob;
use crate::matrix::Matrix;
use crate::metrics::auc;
use crate::seed::{self, tag};

/// Model family plus its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelSpec {
    Ann(AnnConfig),
    RandomForest(ForestConfig),
    ElasticNet(ElasticNetConfig),
    DerivedScore { variant: ScoreVariant },
}

impl ModelSpec {
    /// Short command-line name: `ann`, `rf`, `glmnet`, `lr-ml`, `lr-mle`, `lr-mlep`.
    pub fn name(&self) -> String {
        match self {
            ModelSpec::Ann(_) => "ann".into(),
            ModelSpec::RandomForest(_) => "rf".into(),
            ModelSpec::ElasticNet(_) => "glmnet".into(),
            ModelSpec::DerivedScore { variant } => alloc::format!("lr-{}", variant.name()),
        }
    }

    pub fn names() -> [&'static str; 6] {
        ["ann", "rf", "glmnet", "lr-ml", "lr-mle", "lr-mlep"]
    }
}

impl FromStr for ModelSpec {
    type Err = Error;

    /// Parses a short name into the family with default hyperparameters.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ann" => Ok(ModelSpec::Ann(AnnConfig::default())),
            "rf" => Ok(ModelSpec::RandomForest(ForestConfig::default())),
            "glmnet" => Ok(ModelSpec::ElasticNet(ElasticNetConfig::default())),
            _ => match s.strip_prefix("lr-") {
                Some(v) => Ok(ModelSpec::DerivedScore { variant: v.parse()? }),
                None => Err(Error::UnknownName(s.to_string())),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelKind {
    Ann(AnnModel),
    RandomForest(RandomForestModel),
    ElasticNet(ElasticNetModel),
    DerivedScore(DerivedScoreModel),
}

impl ModelKind {
    pub fn family(&self) -> &'static str {
        match self {
            ModelKind::Ann(_) => "ann",
            ModelKind::RandomForest(_) => "random_forest",
            ModelKind::ElasticNet(_) => "elastic_net",
            ModelKind::DerivedScore(_) => "derived_score",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingProvenance {
    pub spec: ModelSpec,
    pub seed: u64,
    pub n_train: usize,
    pub n_positive: usize,
}

/// A fitted model, the feature order it reads, and how it was trained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub model: ModelKind,
    pub manifest: Vec<Feature>,
    pub provenance: TrainingProvenance,
}

fn manifest_position(manifest: &[Feature], f: Feature) -> Result<usize> {
    manifest.iter().position(|&g| g == f).ok_or_else(|| Error::ManifestMismatch(f.name().into()))
}

/// Trains `spec` on `x`, whose columns follow `manifest`.
pub fn train(spec: &ModelSpec, x: &Matrix, labels: &[bool], manifest: &[Feature], seed: u64) -> Result<TrainedModel> {
    if x.cols() != manifest.len() {
        return Err(Error::DimensionMismatch { expected: manifest.len(), got: x.cols() });
    }
    let model = match spec {
        ModelSpec::Ann(c) => ModelKind::Ann(train_ann(x, labels, c, seed)?),
        ModelSpec::RandomForest(c) => ModelKind::RandomForest(train_random_forest(x, labels, c, seed)?),
        ModelSpec::ElasticNet(c) => ModelKind::ElasticNet(train_elastic_net(x, labels, c, seed)?),
        ModelSpec::DerivedScore { variant } => {
            let cols: Vec<(usize, f64)> = variant
                .terms()
                .iter()
                .map(|&(f, w)| manifest_position(manifest, f).map(|c| (c, w)))
                .collect::<Result<_>>()?;
            let y: Vec<f64> = (0..x.rows()).map(|r| cols.iter().map(|&(c, w)| w * x.get(r, c)).sum()).collect();
            ModelKind::DerivedScore(derived::train_derived(&y, labels, *variant)?)
        }
    };
    Ok(TrainedModel {
        model,
        manifest: manifest.to_vec(),
        provenance: TrainingProvenance {
            spec: spec.clone(),
            seed,
            n_train: labels.len(),
            n_positive: labels.iter().filter(|&&l| l).count(),
        },
    })
}

impl TrainedModel {
    /// Positive-class probability for a row laid out in manifest order, clamped to `[1e-6, 1 - 1e-6]`.
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let p = match &self.model {
            ModelKind::Ann(m) => m.predict_row(row),
            ModelKind::RandomForest(m) => m.predict_row(row),
            ModelKind::ElasticNet(m) => m.predict_row(row),
            ModelKind::DerivedScore(m) => {
                let y: f64 = m
                    .terms
                    .iter()
                    .map(|&(f, w)| w * self.manifest.iter().position(|&g| g == f).map_or(f64::NAN, |c| row[c]))
                    .sum();
                m.fit.predict(y)
            }
        };
        clamp_prob(p)
    }

    pub fn predict_matrix(&self, x: &Matrix) -> Vec<f64> {
        (0..x.rows()).map(|r| self.predict_row(x.row(r))).collect()
    }

    /// Gathers the manifest features from `source` and scores them.
    pub fn predict_proba<S: FeatureSource + ?Sized>(&self, source: &S) -> Result<f64> {
        let row: Vec<f64> = self
            .manifest
            .iter()
            .map(|&f| source.feature(f).ok_or_else(|| Error::ManifestMismatch(f.name().into())))
            .collect::<Result<_>>()?;
        Ok(self.predict_row(&row))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Importance {
    pub feature: Feature,
    pub importance: f64,
}

/// Permutations per feature for forest importance.
pub const PERMUTATION_REPEATS: usize = 10;

/// Unnormalized importances in manifest order.
///
/// Forest: mean AUC drop over seeded permutations of each column of the
/// evaluation set (floored at 0). Elastic net: |coefficient|.
pub fn raw_importance(model: &TrainedModel, x_eval: &Matrix, labels_eval: &[bool], seed: u64) -> Result<Vec<f64>> {
    match &model.model {
        ModelKind::ElasticNet(m) => Ok(m.coefficients.iter().map(|c| libm::fabs(*c)).collect()),
        ModelKind::RandomForest(_) => {
            let base = auc(&model.predict_matrix(x_eval), labels_eval)?;
            let mut out = Vec::with_capacity(x_eval.cols());
            let mut permuted = x_eval.clone();
            for j in 0..x_eval.cols() {
                let original = x_eval.column(j);
                let mut drop = 0.0;
                for r in 0..PERMUTATION_REPEATS {
                    let mut col = original.clone();
                    col.shuffle(&mut seed::rng(seed, &[tag::PERMUTATION, j as u64, r as u64]));
                    for (i, v) in col.iter().enumerate() {
                        permuted.set(i, j, *v);
                    }
                    drop += base - auc(&model.predict_matrix(&permuted), labels_eval)?;
                }
                for (i, v) in original.iter().enumerate() {
                    permuted.set(i, j, *v);
                }
                out.push((drop / PERMUTATION_REPEATS as f64).max(0.0));
            }
            Ok(out)
        }
        ModelKind::Ann(_) => Err(Error::UnsupportedModel("ann")),
        ModelKind::DerivedScore(_) => Err(Error::UnsupportedModel("derived-score")),
    }
}

/// Scales so the largest value is 100 and sorts descending (ties keep manifest order).
pub fn normalize_importance(manifest: &[Feature], raw: &[f64]) -> Vec<Importance> {
    let max = raw.iter().copied().fold(0.0, f64::max);
    let scaled = |v: f64| if max > 0.0 { v / max * 100.0 } else { 0.0 };
    let mut out: Vec<Importance> =
        manifest.iter().zip(raw).map(|(&feature, &v)| Importance { feature, importance: scaled(v) }).collect();
    out.sort_by(|a, b| b.importance.total_cmp(&a.importance));
    out
}

/// Variable importance normalized to a maximum of 100, descending.
pub fn variable_importance(model: &TrainedModel, x_eval: &Matrix, labels_eval: &[bool], seed: u64) -> Result<Vec<Importance>> {
    let raw = raw_importance(model, x_eval, labels_eval, seed)?;
    Ok(normalize_importance(&model.manifest, &raw))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::FeatureVector;
    use alloc::collections::BTreeMap;
    use alloc::vec;

    fn zero_glm() -> TrainedModel {
        TrainedModel {
            model: ModelKind::ElasticNet(ElasticNetModel {
                coefficients: vec![0.0; 14],
                intercept: 0.0,
                lambda: 1.0,
                alpha: 1.0,
                lambda_path: Vec::new(),
                cv_auc: None,
            }),
            manifest: Feature::ALL.to_vec(),
            provenance: TrainingProvenance { spec: "glmnet".parse().unwrap(), seed: 0, n_train: 0, n_positive: 0 },
        }
    }

    #[test]
    fn spec_names_round_trip() {
        for n in ModelSpec::names() {
            assert_eq!(n.parse::<ModelSpec>().unwrap().name(), n);
        }
        assert!("svm".parse::<ModelSpec>().is_err());
        assert!("lr-xyz".parse::<ModelSpec>().is_err());
    }

    #[test]
    fn zero_coefficients_score_one_half() {
        let m = zero_glm();
        assert_eq!(m.predict_proba(&FeatureVector([0.7; 14])).unwrap(), 0.5);
    }

    #[test]
    fn pure_forest_is_clamped() {
        let mut m = zero_glm();
        m.model = ModelKind::RandomForest(RandomForestModel {
            trees: vec![forest::Tree::leaf(1.0); 4],
            n_trees: 4,
            mtry: 3,
            min_leaf: 1,
            n_features: 14,
        });
        assert_eq!(m.predict_proba(&FeatureVector([0.0; 14])).unwrap(), 1.0 - 1e-6);
    }

    #[test]
    fn derived_model_applies_sigmoid_of_score() {
        let mut m = zero_glm();
        let fit = ScalarLogistic { slope: 2.0, intercept: -0.5, iterations: 1, perfect_separation: false };
        m.model = ModelKind::DerivedScore(DerivedScoreModel {
            variant: ScoreVariant::Mlep,
            terms: ScoreVariant::Mlep.terms().to_vec(),
            fit,
        });
        let mut v = FeatureVector([0.0; 14]);
        v.set(Feature::Monocytes, 1.0);
        v.set(Feature::Platelets, 0.25);
        assert_eq!(m.predict_proba(&v).unwrap(), crate::math::sigmoid(2.0 * 0.75 - 0.5));
    }

    #[test]
    fn manifest_driven_access_ignores_field_order() {
        let mut m = zero_glm();
        if let ModelKind::ElasticNet(e) = &mut m.model {
            e.coefficients = (0..14).map(|i| i as f64 * 0.1 - 0.6).collect();
        }
        let pairs: Vec<(Feature, f64)> = Feature::ALL.iter().map(|&f| (f, f.index() as f64 * 0.3)).collect();
        let mut reversed = pairs.clone();
        reversed.reverse();
        let map: BTreeMap<Feature, f64> = pairs.iter().copied().collect();
        let a = m.predict_proba(&pairs[..]).unwrap();
        assert_eq!(a, m.predict_proba(&reversed[..]).unwrap());
        assert_eq!(a, m.predict_proba(&map).unwrap());
        assert!(matches!(m.predict_proba(&pairs[1..]), Err(Error::ManifestMismatch(_))));
    }

    #[test]
    fn importance_unsupported_for_ann() {
        let mut m = zero_glm();
        m.model = ModelKind::Ann(AnnModel::init(14, &AnnConfig::default(), 0).unwrap());
        let x = Matrix::zeros(2, 14);
        assert_eq!(variable_importance(&m, &x, &[true, false], 0), Err(Error::UnsupportedModel("ann")));
    }

    #[test]
    fn glm_importance_is_normalized_abs_coefficients() {
        let mut m = zero_glm();
        if let ModelKind::ElasticNet(e) = &mut m.model {
            e.coefficients[Feature::Eosinophils.index()] = -2.0;
            e.coefficients[Feature::Monocytes.index()] = 1.0;
        }
        let imp = variable_importance(&m, &Matrix::zeros(2, 14), &[true, false], 0).unwrap();
        assert_eq!(imp[0], Importance { feature: Feature::Eosinophils, importance: 100.0 });
        assert_eq!(imp[1], Importance { feature: Feature::Monocytes, importance: 50.0 });
        assert!(imp[2..].iter().all(|i| i.importance == 0.0));
    }
}
