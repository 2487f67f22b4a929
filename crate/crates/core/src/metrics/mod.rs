//! ROC/AUC, threshold metrics and cutoff selection.
//!
//! Scores are "higher means more likely positive"; labels are `true` for positive.

mod cv;

pub use cv::{
    check_plan, cross_validate, evaluate_fold, report_meta, summarize, train_fold, wrap as wrap_fold_error, Aggregate,
    EvalReport, FoldModel, FoldResult, MetricSummary, ReportMeta, EVAL_REPORT_SCHEMA,
};

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::mid_ranks;

fn class_counts(labels: &[bool]) -> Result<(usize, usize)> {
    let pos = labels.iter().filter(|&&p| p).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }
    Ok((pos, neg))
}

fn check_lengths(scores: &[f64], labels: &[bool]) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: labels.len(), got: scores.len() });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::NonFiniteInput);
    }
    Ok(())
}

/// Area under the ROC curve in its Mann-Whitney form: the fraction of
/// (positive, negative) pairs where the positive scores higher, ties counting half.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    check_lengths(scores, labels)?;
    let (pos, neg) = class_counts(labels)?;
    let (ranks, _) = mid_ranks(scores);
    let rank_sum: f64 = ranks.iter().zip(labels).filter(|(_, &l)| l).map(|(r, _)| r).sum();
    let u = rank_sum - (pos * (pos + 1)) as f64 / 2.0;
    Ok(u / (pos as f64 * neg as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// Predict positive iff score >= threshold. Endpoints use +inf / -inf.
    #[serde(with = "crate::serde_ext::maybe_infinite")]
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// Trapezoidal area under a sequence of ROC points.
pub fn trapezoid_area(points: &[RocPoint]) -> f64 {
    points.windows(2).map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0).sum()
}

/// ROC curve swept over the distinct scores in descending order.
///
/// The curve starts with a `+inf` threshold at (0, 0), has one point per distinct
/// score (tied scores move both rates in a single step) and ends with a `-inf`
/// sentinel at (1, 1), so it has `distinct + 2` points.
pub fn roc_curve(scores: &[f64], labels: &[bool]) -> Result<RocCurve> {
    check_lengths(scores, labels)?;
    let (pos, neg) = class_counts(labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = Vec::with_capacity(scores.len() + 2);
    points.push(RocPoint { fpr: 0.0, tpr: 0.0, threshold: f64::INFINITY });
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint { fpr: fp as f64 / neg as f64, tpr: tp as f64 / pos as f64, threshold: s });
    }
    points.push(RocPoint { fpr: 1.0, tpr: 1.0, threshold: f64::NEG_INFINITY });
    let auc = trapezoid_area(&points);
    Ok(RocCurve { points, auc })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdMetrics {
    pub threshold: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub accuracy: f64,
    pub confusion: Confusion,
    /// Rows are the actual class (negative, positive); columns the predicted class
    /// (negative, positive); each row sums to 1.
    pub normalized_confusion: [[f64; 2]; 2],
}

fn confusion_at(scores: &[f64], labels: &[bool], threshold: f64) -> Confusion {
    let mut c = Confusion::default();
    for (&s, &l) in scores.iter().zip(labels) {
        match (s >= threshold, l) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    c
}

/// Classification metrics when predicting positive iff `score >= threshold`.
pub fn metrics_at(scores: &[f64], labels: &[bool], threshold: f64) -> Result<ThresholdMetrics> {
    check_lengths(scores, labels)?;
    let (pos, neg) = class_counts(labels)?;
    let c = confusion_at(scores, labels, threshold);
    let (p, n) = (pos as f64, neg as f64);
    let sensitivity = c.tp as f64 / p;
    let specificity = c.tn as f64 / n;
    Ok(ThresholdMetrics {
        threshold,
        sensitivity,
        specificity,
        accuracy: (c.tp + c.tn) as f64 / (p + n),
        confusion: c,
        normalized_confusion: [[specificity, c.fp as f64 / n], [c.fn_ as f64 / p, sensitivity]],
    })
}

/// Threshold maximizing Youden's J over the distinct scores; ties go to the lowest threshold.
pub fn optimal_cutoff(scores: &[f64], labels: &[bool]) -> Result<f64> {
    check_lengths(scores, labels)?;
    let (pos, neg) = class_counts(labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Sweep ascending. At candidate threshold s, everything below s is predicted
    // negative. J * pos * neg = tp*neg + tn*pos - pos*neg is compared in integers.
    let (mut tn, mut fn_) = (0usize, 0usize);
    let mut best: Option<(u128, f64)> = None;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        let tp = pos - fn_;
        let key = (tp as u128) * (neg as u128) + (tn as u128) * (pos as u128);
        if best.is_none_or(|(b, _)| key > b) {
            best = Some((key, s));
        }
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] {
                fn_ += 1;
            } else {
                tn += 1;
            }
            i += 1;
        }
    }
    Ok(best.expect("non-empty scores").1)
}

/// Youden's J at a threshold.
pub fn youden_j(scores: &[f64], labels: &[bool], threshold: f64) -> Result<f64> {
    let m = metrics_at(scores, labels, threshold)?;
    Ok(m.sensitivity + m.specificity - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    const S: [f64; 4] = [0.1, 0.4, 0.35, 0.8];
    const L: [bool; 4] = [false, false, true, true];

    #[test]
    fn four_point_auc() {
        assert_eq!(auc(&S, &L).unwrap(), 0.75);
    }

    #[test]
    fn perfect_and_tied_auc() {
        assert_eq!(auc(&[0.1, 0.2, 0.8, 0.9], &L).unwrap(), 1.0);
        assert_eq!(auc(&[0.5; 4], &L).unwrap(), 0.5);
        assert_eq!(auc(&[0.5; 2], &[true, true]), Err(Error::SingleClass));
    }

    #[test]
    fn four_point_roc() {
        let roc = roc_curve(&S, &L).unwrap();
        let xy: Vec<(f64, f64)> = roc.points.iter().map(|p| (p.fpr, p.tpr)).collect();
        assert_eq!(xy, vec![(0.0, 0.0), (0.0, 0.5), (0.5, 0.5), (0.5, 1.0), (1.0, 1.0), (1.0, 1.0)]);
        assert_eq!(roc.points.len(), 4 + 2);
        assert_eq!(roc.auc, 0.75);
        assert_eq!(roc.points[0].threshold, f64::INFINITY);
        assert_eq!(roc.points[5].threshold, f64::NEG_INFINITY);
    }

    #[test]
    fn perfect_roc_shape() {
        let roc = roc_curve(&[0.1, 0.2, 0.8, 0.9], &L).unwrap();
        let xy: Vec<(f64, f64)> = roc.points.iter().map(|p| (p.fpr, p.tpr)).collect();
        assert!(xy.contains(&(0.0, 1.0)));
        assert_eq!(roc.auc, 1.0);
    }

    #[test]
    fn threshold_metrics() {
        let m = metrics_at(&S, &L, 0.1).unwrap();
        assert_eq!((m.sensitivity, m.specificity), (1.0, 0.0));
        let m = metrics_at(&S, &L, 0.81).unwrap();
        assert_eq!((m.sensitivity, m.specificity), (0.0, 1.0));
        let m = metrics_at(&S, &L, 0.4).unwrap();
        assert_eq!(m.confusion, Confusion { tp: 1, fp: 1, tn: 1, fn_: 1 });
        assert_eq!(m.accuracy, 0.5);
        for row in m.normalized_confusion {
            assert_eq!(row[0] + row[1], 1.0);
        }
    }

    #[test]
    fn cutoff_examples() {
        assert_eq!(optimal_cutoff(&S, &L).unwrap(), 0.35);
        assert_eq!(youden_j(&S, &L, 0.35).unwrap(), 0.5);
        assert_eq!(optimal_cutoff(&[0.1, 0.2, 0.8, 0.9], &L).unwrap(), 0.8);
        assert_eq!(optimal_cutoff(&[0.3; 4], &L).unwrap(), 0.3);
    }

    #[test]
    fn threshold_serde_keeps_infinities() {
        let p = RocPoint { fpr: 0.0, tpr: 0.0, threshold: f64::INFINITY };
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"fpr":0.0,"tpr":0.0,"threshold":"inf"}"#);
        let back: RocPoint = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }
}
