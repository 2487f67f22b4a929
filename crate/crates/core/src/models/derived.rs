//! Linear blood-count score (monocytes minus leukocytes, eosinophils, platelets)
//! and the one-dimensional logistic regression fitted on it.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{Feature, FeatureSource};
use crate::error::{Error, Result};
use crate::math::{sigmoid, softplus};

/// Largest slope magnitude kept when the classes are separated.
pub const SLOPE_CAP: f64 = 50.0;
pub const NEWTON_TOL: f64 = 1e-10;
pub const NEWTON_MAX_ITER: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreVariant {
    /// monocytes - leukocytes
    Ml,
    /// monocytes - leukocytes - eosinophils
    Mle,
    /// monocytes - leukocytes - eosinophils - platelets
    Mlep,
}

impl ScoreVariant {
    pub const ALL: [ScoreVariant; 3] = [ScoreVariant::Ml, ScoreVariant::Mle, ScoreVariant::Mlep];

    pub fn terms(self) -> &'static [(Feature, f64)] {
        const TERMS: [(Feature, f64); 4] = [
            (Feature::Monocytes, 1.0),
            (Feature::Leukocytes, -1.0),
            (Feature::Eosinophils, -1.0),
            (Feature::Platelets, -1.0),
        ];
        match self {
            ScoreVariant::Ml => &TERMS[..2],
            ScoreVariant::Mle => &TERMS[..3],
            ScoreVariant::Mlep => &TERMS[..],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScoreVariant::Ml => "ml",
            ScoreVariant::Mle => "mle",
            ScoreVariant::Mlep => "mlep",
        }
    }

    /// Display form such as `m-l-e-p`.
    pub fn formula(self) -> &'static str {
        match self {
            ScoreVariant::Ml => "m-l",
            ScoreVariant::Mle => "m-l-e",
            ScoreVariant::Mlep => "m-l-e-p",
        }
    }
}

impl fmt::Display for ScoreVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScoreVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScoreVariant::ALL
            .iter()
            .copied()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::UnknownName(s.into()))
    }
}

/// Signed sum of the variant's features.
pub fn derived_score<S: FeatureSource + ?Sized>(record: &S, variant: ScoreVariant) -> Result<f64> {
    variant.terms().iter().try_fold(0.0, |acc, &(f, w)| {
        record.feature(f).map(|v| acc + w * v).ok_or_else(|| Error::ManifestMismatch(f.name().into()))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarLogistic {
    pub slope: f64,
    pub intercept: f64,
    pub iterations: usize,
    /// Classes were separated; the slope is capped at [`SLOPE_CAP`].
    pub perfect_separation: bool,
}

impl ScalarLogistic {
    pub fn predict(&self, y: f64) -> f64 {
        sigmoid(self.slope * y + self.intercept)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedScoreModel {
    pub variant: ScoreVariant,
    pub terms: Vec<(Feature, f64)>,
    pub fit: ScalarLogistic,
}

impl DerivedScoreModel {
    pub fn predict<S: FeatureSource + ?Sized>(&self, record: &S) -> Result<f64> {
        Ok(self.fit.predict(derived_score(record, self.variant)?))
    }
}

fn neg_log_lik(y: &[f64], t: &[f64], slope: f64, intercept: f64) -> f64 {
    y.iter().zip(t).map(|(&v, &ti)| {
        let e = slope * v + intercept;
        softplus(e) - ti * e
    }).sum()
}

fn separated_fit(values: &[f64], labels: &[bool]) -> Option<ScalarLogistic> {
    let range = |want: bool| {
        values
            .iter()
            .zip(labels)
            .filter(|(_, &l)| l == want)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (&v, _)| (lo.min(v), hi.max(v)))
    };
    let (pos_lo, pos_hi) = range(true);
    let (neg_lo, neg_hi) = range(false);
    let (slope, mid) = if neg_hi < pos_lo {
        (SLOPE_CAP, (neg_hi + pos_lo) / 2.0)
    } else if pos_hi < neg_lo {
        (-SLOPE_CAP, (pos_hi + neg_lo) / 2.0)
    } else {
        return None;
    };
    Some(ScalarLogistic { slope, intercept: -slope * mid, iterations: 0, perfect_separation: true })
}

/// Fits `P(positive | y) = sigmoid(slope * y + intercept)` by Newton's method.
///
/// Completely separated classes have no finite maximum-likelihood slope; in that
/// case the returned fit has `perfect_separation` set and `|slope| = SLOPE_CAP`.
pub fn train_logistic_scalar(values: &[f64], labels: &[bool]) -> Result<ScalarLogistic> {
    if values.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: labels.len(), got: values.len() });
    }
    if !labels.iter().any(|&l| l) || labels.iter().all(|&l| l) {
        return Err(Error::SingleClass);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    if let Some(fit) = separated_fit(values, labels) {
        return Ok(fit);
    }

    let t: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { 0.0 }).collect();
    let frac = t.iter().sum::<f64>() / t.len() as f64;
    let (mut b, mut a) = (0.0, libm::log(frac / (1.0 - frac)));
    let mut nll = neg_log_lik(values, &t, b, a);
    let mut iterations = 0;
    for it in 1..=NEWTON_MAX_ITER {
        iterations = it;
        let (mut ga, mut gb, mut haa, mut hab, mut hbb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&v, &ti) in values.iter().zip(&t) {
            let p = sigmoid(b * v + a);
            let w = p * (1.0 - p);
            ga += p - ti;
            gb += (p - ti) * v;
            haa += w;
            hab += w * v;
            hbb += w * v * v;
        }
        let det = haa * hbb - hab * hab;
        if !(det > 0.0) {
            break;
        }
        let mut da = -(hbb * ga - hab * gb) / det;
        let mut db = -(haa * gb - hab * ga) / det;
        // step halving keeps the likelihood from decreasing
        let mut next = neg_log_lik(values, &t, b + db, a + da);
        let mut halvings = 0;
        while next > nll && halvings < 50 {
            da /= 2.0;
            db /= 2.0;
            next = neg_log_lik(values, &t, b + db, a + da);
            halvings += 1;
        }
        a += da;
        b += db;
        nll = next;
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::NonFinite { stage: "newton iteration", index: it });
        }
        if libm::sqrt(da * da + db * db) < NEWTON_TOL {
            break;
        }
    }
    let perfect_separation = libm::fabs(b) > SLOPE_CAP;
    if perfect_separation {
        // quasi-separation: keep the decision point, cap the slope
        let mid = -a / b;
        b = b.signum() * SLOPE_CAP;
        a = -b * mid;
    }
    Ok(ScalarLogistic { slope: b, intercept: a, iterations, perfect_separation })
}

pub fn train_derived(values: &[f64], labels: &[bool], variant: ScoreVariant) -> Result<DerivedScoreModel> {
    Ok(DerivedScoreModel { variant, terms: variant.terms().to_vec(), fit: train_logistic_scalar(values, labels)? })
}
