mod common;

use common::oracles::{pairwise_auc, segment_parameter};
use hemascreen_core::metrics::{auc, optimal_cutoff, roc_curve, youden_j};
use hemascreen_core::resample::{balance_training_fold, smote, stratified_kfold, Origin};
use hemascreen_core::stats::wilcoxon_rank_sum;
use hemascreen_core::Matrix;
use proptest::prelude::*;

fn labeled_scores() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
    (2usize..200).prop_flat_map(|n| {
        (prop::collection::vec(-50i32..50, n), prop::collection::vec(any::<bool>(), n)).prop_map(|(s, mut l)| {
            l[0] = true;
            l[1] = false;
            (s.into_iter().map(|v| v as f64 / 4.0).collect(), l)
        })
    })
}

fn distinct_scores() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
    (2usize..200).prop_flat_map(|n| {
        let ranks = Just((0..n).collect::<Vec<usize>>()).prop_shuffle();
        (ranks, prop::collection::vec(any::<bool>(), n)).prop_map(|(r, mut l)| {
            l[0] = true;
            l[1] = false;
            (r.into_iter().map(|v| v as f64 * 0.37 - 5.0).collect(), l)
        })
    })
}

proptest! {
    #[test]
    fn auc_equals_pairwise_and_trapezoid((s, l) in labeled_scores()) {
        let a = auc(&s, &l).unwrap();
        prop_assert!((a - pairwise_auc(&s, &l)).abs() <= 1e-12);
        prop_assert!((roc_curve(&s, &l).unwrap().auc - a).abs() <= 1e-12);
    }

    #[test]
    fn roc_is_monotone_from_origin_to_corner((s, l) in labeled_scores()) {
        let roc = roc_curve(&s, &l).unwrap();
        let first = roc.points[0];
        let last = roc.points[roc.points.len() - 1];
        prop_assert_eq!((first.fpr, first.tpr), (0.0, 0.0));
        prop_assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
        for w in roc.points.windows(2) {
            prop_assert!(w[1].fpr >= w[0].fpr && w[1].tpr >= w[0].tpr);
        }
    }

    #[test]
    fn negated_scores_complement_auc((s, l) in distinct_scores()) {
        let neg: Vec<f64> = s.iter().map(|v| -v).collect();
        prop_assert!((auc(&s, &l).unwrap() + auc(&neg, &l).unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn monotone_transform_keeps_auc_and_youden((s, l) in labeled_scores()) {
        let t: Vec<f64> = s.iter().map(|v| (v / 3.0).exp() * 2.0 + 1.0).collect();
        prop_assert_eq!(auc(&s, &l).unwrap(), auc(&t, &l).unwrap());
        let j = youden_j(&s, &l, optimal_cutoff(&s, &l).unwrap()).unwrap();
        let jt = youden_j(&t, &l, optimal_cutoff(&t, &l).unwrap()).unwrap();
        prop_assert_eq!(j, jt);
    }

    #[test]
    fn rank_sum_u_statistics_complement(
        x in prop::collection::vec(-20i32..20, 1..30),
        y in prop::collection::vec(-20i32..20, 1..30),
    ) {
        let x: Vec<f64> = x.into_iter().map(f64::from).collect();
        let y: Vec<f64> = y.into_iter().map(f64::from).collect();
        let a = wilcoxon_rank_sum(&x, &y).unwrap();
        let b = wilcoxon_rank_sum(&y, &x).unwrap();
        prop_assert_eq!(a.u_statistic + b.u_statistic, (x.len() * y.len()) as f64);
        prop_assert!(a.p_value > 0.0 && a.p_value <= 1.0);
    }

    #[test]
    fn rank_sum_ignores_monotone_transforms(
        x in prop::collection::vec(-20i32..20, 1..25),
        y in prop::collection::vec(-20i32..20, 1..25),
    ) {
        let f = |v: &i32| f64::from(*v);
        let g = |v: &i32| (f64::from(*v) / 5.0).exp() - 3.0;
        let a = wilcoxon_rank_sum(&x.iter().map(f).collect::<Vec<_>>(), &y.iter().map(f).collect::<Vec<_>>()).unwrap();
        let b = wilcoxon_rank_sum(&x.iter().map(g).collect::<Vec<_>>(), &y.iter().map(g).collect::<Vec<_>>()).unwrap();
        prop_assert_eq!(a.p_value, b.p_value);
    }

    #[test]
    fn stratified_folds_partition_and_balance(
        n_pos in 2usize..60, n_neg in 2usize..200, k in 2usize..11, repeats in 1usize..4, seed in any::<u64>(),
    ) {
        prop_assume!(n_pos >= k && n_neg >= k);
        let mut labels = vec![true; n_pos];
        labels.extend(vec![false; n_neg]);
        let plan = stratified_kfold(&labels, k, repeats, seed).unwrap();
        prop_assert_eq!(&plan, &stratified_kfold(&labels, k, repeats, seed).unwrap());
        for r in 0..repeats {
            let mut seen = vec![0usize; labels.len()];
            for id in plan.folds().filter(|f| f.repeat == r) {
                let test = plan.test_indices(id);
                for &i in &test {
                    seen[i] += 1;
                }
                for (class, total) in [(true, n_pos), (false, n_neg)] {
                    let count = test.iter().filter(|&&i| labels[i] == class).count() as f64;
                    prop_assert!((count - total as f64 / k as f64).abs() < 1.0);
                }
            }
            prop_assert!(seen.iter().all(|&c| c == 1));
        }
    }

    #[test]
    fn smote_samples_are_convex_combinations(
        rows in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 4), 2..20),
        n in 0usize..60, k in 1usize..6, seed in any::<u64>(),
    ) {
        let m = Matrix::from_rows(&rows).unwrap();
        let k = k.min(rows.len() - 1);
        let batch = smote(&m, k, n, seed).unwrap();
        prop_assert_eq!(batch.samples.rows(), n);
        for (s, &(a, b)) in batch.parent_pairs.iter().enumerate() {
            prop_assert_ne!(a, b);
            let t = segment_parameter(batch.samples.row(s), m.row(a), m.row(b), 1e-9);
            prop_assert!(t.is_some());
            let t = t.unwrap();
            prop_assert!((-1e-9..1.0 + 1e-9).contains(&t));
        }
    }

    #[test]
    fn balancing_reaches_parity_and_keeps_originals(
        n_pos in 2usize..15, n_neg in 2usize..40, seed in any::<u64>(),
    ) {
        let mut r = common::rng(seed);
        let x = common::random_matrix(&mut r, n_pos + n_neg, 3);
        let mut labels = vec![true; n_pos];
        labels.extend(vec![false; n_neg]);
        let b = balance_training_fold(&x, &labels, 5, seed).unwrap();
        let pos = b.labels.iter().filter(|&&l| l).count();
        prop_assert_eq!(pos, b.labels.len() - pos);
        for (i, o) in b.origin.iter().enumerate() {
            match *o {
                Origin::Original(j) => prop_assert_eq!(b.x.row(i), x.row(j)),
                Origin::Synthetic(p, q) => {
                    prop_assert!(labels[p] == labels[q] && labels[p] == b.labels[i]);
                    prop_assert!(segment_parameter(b.x.row(i), x.row(p), x.row(q), 1e-9).is_some());
                }
            }
        }
    }
}
