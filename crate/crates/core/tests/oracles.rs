mod common;

use common::oracles::*;
use common::{normal, random_matrix, rng};
use hemascreen_core::metrics::{auc, roc_curve, trapezoid_area};
use hemascreen_core::models::derived::ScoreVariant;
use hemascreen_core::models::elastic_net::{fit_path, lambda_max, MONOTONE_TOL};
use hemascreen_core::models::forest::ForestConfig;
use hemascreen_core::models::{
    self, derived_score, train_ann, train_elastic_net, train_random_forest, Activation, AnnConfig, AnnModel,
    ElasticNetConfig, LambdaSelection, ModelSpec,
};
use hemascreen_core::stats::{wilcoxon_rank_sum, wilcoxon_rank_sum_with, MethodChoice, RankSumMethod};
use hemascreen_core::{Feature, Matrix, FEATURE_COUNT};
use rand::seq::SliceRandom;
use rand::Rng;

#[test]
fn auc_matches_pairwise_count_and_trapezoid() {
    let mut r = rng(1);
    for _ in 0..300 {
        let n = r.gen_range(2..120);
        let mut labels: Vec<bool> = (0..n).map(|_| r.gen_bool(0.4)).collect();
        labels[0] = true;
        labels[1] = false;
        // coarse grid forces ties
        let scores: Vec<f64> = (0..n).map(|_| (r.gen_range(0..15) as f64) / 7.0).collect();
        let a = auc(&scores, &labels).unwrap();
        assert!((a - pairwise_auc(&scores, &labels)).abs() <= 1e-12);
        let roc = roc_curve(&scores, &labels).unwrap();
        assert!((roc.auc - a).abs() <= 1e-12);
        assert_eq!(roc.auc, trapezoid_area(&roc.points));
    }
}

#[test]
fn exact_rank_sum_matches_enumeration() {
    let mut r = rng(2);
    for n in 2..=10 {
        for n1 in 1..n {
            for _ in 0..5 {
                let mut pool: Vec<f64> = (0..n).map(|i| i as f64 + r.gen::<f64>() * 0.5).collect();
                pool.shuffle(&mut r);
                let (x, y) = pool.split_at(n1);
                let got = wilcoxon_rank_sum(x, y).unwrap();
                assert_eq!(got.method, RankSumMethod::Exact);
                assert_eq!(got.p_value, enumerated_rank_sum_p(x, y), "x={x:?} y={y:?}");
            }
        }
    }
}

#[test]
fn exact_and_normal_agree_at_ten_per_group() {
    let mut r = rng(3);
    for _ in 0..40 {
        let shift = r.gen_range(0.0..1.5);
        let x: Vec<f64> = (0..10).map(|_| normal(&mut r) + shift).collect();
        let y: Vec<f64> = (0..10).map(|_| normal(&mut r)).collect();
        let e = wilcoxon_rank_sum_with(&x, &y, MethodChoice::Exact).unwrap();
        let a = wilcoxon_rank_sum_with(&x, &y, MethodChoice::NormalApprox).unwrap();
        assert!((e.p_value - a.p_value).abs() < 0.02, "{} vs {}", e.p_value, a.p_value);
    }
}

fn well_conditioned(seed: u64, n: usize, p: usize) -> (Matrix, Vec<bool>) {
    let mut r = rng(seed);
    let x = random_matrix(&mut r, n, p);
    let beta: Vec<f64> = (0..p).map(|j| if j % 2 == 0 { 0.8 } else { -0.5 }).collect();
    let labels = (0..n)
        .map(|i| {
            let eta: f64 = 0.3 + x.row(i).iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>();
            r.gen::<f64>() < 1.0 / (1.0 + (-eta).exp())
        })
        .collect();
    (x, labels)
}

#[test]
fn unpenalized_elastic_net_matches_irls() {
    for seed in 0..5 {
        let (x, labels) = well_conditioned(10 + seed, 200, 4);
        let (b0, b) = irls_logistic(&x, &labels);
        let cfg = ElasticNetConfig { selection: LambdaSelection::Fixed(0.0), tolerance: 1e-12, max_sweeps: 100_000, ..Default::default() };
        let m = train_elastic_net(&x, &labels, &cfg, 0).unwrap();
        assert_eq!(m.lambda, 0.0);
        assert!((m.intercept - b0).abs() < 1e-4, "{} vs {b0}", m.intercept);
        for (got, want) in m.coefficients.iter().zip(&b) {
            assert!((got - want).abs() < 1e-4, "{got} vs {want}");
        }
    }
}

#[test]
fn coordinate_descent_objective_never_increases() {
    let (x, labels) = well_conditioned(20, 150, 6);
    for alpha in [1.0f64, 0.5, 0.0] {
        let lmax = lambda_max(&x, &labels, alpha.max(1e-3));
        let lambdas = [lmax * 0.5, lmax * 0.1, lmax * 0.01, 0.0];
        for point in fit_path(&x, &labels, alpha, &lambdas, 10_000, 1e-9).unwrap() {
            assert!(point.objective_trace.len() >= 2);
            for w in point.objective_trace.windows(2) {
                assert!(w[1] <= w[0] + MONOTONE_TOL, "alpha {alpha}: {} -> {}", w[0], w[1]);
            }
        }
    }
}

#[test]
fn full_shrinkage_gives_null_model() {
    for seed in 30..50 {
        let (x, labels) = well_conditioned(seed, 80 + seed as usize, 6);
        for alpha in [1.0, 0.5] {
            let lmax = lambda_max(&x, &labels, alpha);
            for lambda in [lmax, 2.0 * lmax] {
                let cfg = ElasticNetConfig { alpha, selection: LambdaSelection::Fixed(lambda), ..Default::default() };
                let m = train_elastic_net(&x, &labels, &cfg, 0).unwrap();
                assert!(m.coefficients.iter().all(|&c| c == 0.0), "seed {seed}: {:?}", m.coefficients);
                let frac = labels.iter().filter(|&&l| l).count() as f64 / labels.len() as f64;
                assert!((m.intercept - (frac / (1.0 - frac)).ln()).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn ann_gradient_matches_finite_differences() {
    let mut r = rng(4);
    for instance in 0..50 {
        let activation = if instance % 2 == 0 { Activation::Relu } else { Activation::Tanh };
        let cfg = AnnConfig { activation, ..Default::default() };
        let model = AnnModel::init(FEATURE_COUNT, &cfg, instance).unwrap();
        let x = random_matrix(&mut r, 6, FEATURE_COUNT);
        let y: Vec<f64> = (0..6).map(|i| (i % 2) as f64).collect();
        let rows: Vec<usize> = (0..6).collect();
        let (_, analytic) = model.loss_and_gradient(&x, &y, &rows);
        let numeric = finite_difference_gradient(&model, &x, &y, &rows, 1e-5);
        let err = max_relative_error(&analytic, &numeric, 1e-8);
        assert!(err < 1e-4, "instance {instance} ({activation:?}): {err}");
    }
}

#[test]
fn ann_learns_xor() {
    let mut x = Matrix::zeros(4, FEATURE_COUNT);
    let labels = [false, true, true, false];
    for (i, (a, b)) in [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)].into_iter().enumerate() {
        x.set(i, 0, a);
        x.set(i, 1, b);
    }
    let m = train_ann(&x, &labels, &AnnConfig { epochs: 2000, ..Default::default() }, 7).unwrap();
    for (i, &l) in labels.iter().enumerate() {
        assert_eq!(m.predict_row(x.row(i)) >= 0.5, l, "row {i}");
    }
}

#[test]
fn single_full_tree_fits_training_data() {
    let mut r = rng(5);
    let x = random_matrix(&mut r, 120, FEATURE_COUNT);
    let labels: Vec<bool> = (0..120).map(|_| r.gen_bool(0.5)).collect();
    let cfg = ForestConfig { n_trees: 1, mtry: Some(FEATURE_COUNT), min_leaf: 1, bootstrap: false, ..Default::default() };
    let m = train_random_forest(&x, &labels, &cfg, 9).unwrap();
    for (i, &l) in labels.iter().enumerate() {
        assert_eq!(m.predict_vote(x.row(i)), l);
    }
}

fn importance_data(seed: u64) -> (Matrix, Vec<bool>) {
    let mut r = rng(seed);
    let mut x = random_matrix(&mut r, 200, FEATURE_COUNT);
    let labels: Vec<bool> = (0..200).map(|i| i % 3 == 0).collect();
    for (i, &l) in labels.iter().enumerate() {
        // eosinophils carries the label exactly
        x.set(i, Feature::Eosinophils.index(), if l { 1.0 } else { -1.0 });
    }
    (x, labels)
}

#[test]
fn importance_finds_label_column_and_ignores_noise() {
    let (x, labels) = importance_data(6);
    let (xe, le) = importance_data(60);
    let manifest = Feature::ALL.to_vec();
    let specs = [
        ModelSpec::RandomForest(ForestConfig { n_trees: 100, ..Default::default() }),
        ModelSpec::ElasticNet(ElasticNetConfig::default()),
    ];
    for spec in specs {
        let m = models::train(&spec, &x, &labels, &manifest, 11).unwrap();
        let imp = models::variable_importance(&m, &xe, &le, 12).unwrap();
        assert_eq!(imp[0].feature, Feature::Eosinophils, "{}", spec.name());
        assert_eq!(imp[0].importance, 100.0);
        let noise = imp.iter().find(|i| i.feature == Feature::Monocytes).unwrap();
        assert!(noise.importance < 5.0, "{}: {}", spec.name(), noise.importance);
    }
}

#[test]
fn mlep_minus_mle_is_negative_platelets() {
    let mut r = rng(8);
    for _ in 0..200 {
        let v: Vec<(Feature, f64)> = Feature::ALL.iter().map(|&f| (f, normal(&mut r) * 3.0)).collect();
        let d = derived_score(v.as_slice(), ScoreVariant::Mlep).unwrap() - derived_score(v.as_slice(), ScoreVariant::Mle).unwrap();
        let platelets = v[Feature::Platelets.index()].1;
        assert!((d + platelets).abs() < 1e-12);
    }
}
