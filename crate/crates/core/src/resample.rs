//! Stratified k-fold planning and SMOTE oversampling.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::seed::{self, tag};

pub const DEFAULT_K_NEIGHBORS: usize = 5;

/// Fold assignments for `repeats` independent stratified k-fold partitions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub repeats: usize,
    pub master_seed: u64,
    /// `assignments[repeat][record_index]` = fold id.
    pub assignments: Vec<Vec<usize>>,
}

/// One (repeat, fold) cell of a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldId {
    pub repeat: usize,
    pub fold: usize,
}

impl FoldPlan {
    pub fn n_records(&self) -> usize {
        self.assignments.first().map_or(0, Vec::len)
    }

    pub fn n_folds(&self) -> usize {
        self.k * self.repeats
    }

    /// All folds in (repeat, fold) order.
    pub fn folds(&self) -> impl Iterator<Item = FoldId> + '_ {
        (0..self.repeats).flat_map(move |repeat| (0..self.k).map(move |fold| FoldId { repeat, fold }))
    }

    pub fn test_indices(&self, id: FoldId) -> Vec<usize> {
        self.indices_where(id, |f| f == id.fold)
    }

    pub fn train_indices(&self, id: FoldId) -> Vec<usize> {
        self.indices_where(id, |f| f != id.fold)
    }

    fn indices_where(&self, id: FoldId, pred: impl Fn(usize) -> bool) -> Vec<usize> {
        self.assignments[id.repeat]
            .iter()
            .enumerate()
            .filter(|(_, &f)| pred(f))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Stratified k-fold assignment, repeated `repeats` times.
///
/// Each class is shuffled with its own derived seed and dealt round-robin. The
/// positive class starts dealing where the negative class stopped so that total
/// fold sizes stay within one of each other as well.
pub fn stratified_kfold(labels: &[bool], k: usize, repeats: usize, master_seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::BadFoldConfig("k must be at least 2"));
    }
    if repeats < 1 {
        return Err(Error::BadFoldConfig("repeats must be at least 1"));
    }
    let neg: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i]).collect();
    let pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    for (class, members) in [("negative", &neg), ("positive", &pos)] {
        if members.len() < k {
            return Err(Error::TooFewPerClass { class, count: members.len(), k });
        }
    }

    let mut assignments = Vec::with_capacity(repeats);
    for repeat in 0..repeats {
        let mut fold_of = alloc::vec![0usize; labels.len()];
        let mut start = 0;
        for (class_tag, members) in [(0u64, &neg), (1u64, &pos)] {
            let mut shuffled = members.clone();
            let mut rng = seed::rng(master_seed, &[tag::FOLDS, repeat as u64, class_tag]);
            shuffled.shuffle(&mut rng);
            for (j, &idx) in shuffled.iter().enumerate() {
                fold_of[idx] = (start + j) % k;
            }
            start = (start + members.len()) % k;
        }
        assignments.push(fold_of);
    }
    Ok(FoldPlan { k, repeats, master_seed, assignments })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticBatch {
    pub samples: Matrix,
    /// (base point, chosen neighbor) indices into the minority set.
    pub parent_pairs: Vec<(usize, usize)>,
    /// Interpolation weights: `sample = base + t * (neighbor - base)`.
    pub weights: Vec<f64>,
    pub seed: u64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Indices of the `k` nearest other rows of `x` to row `i`, nearest first.
fn nearest_neighbors(x: &Matrix, i: usize, k: usize) -> Vec<usize> {
    let mut d: Vec<(f64, usize)> =
        (0..x.rows()).filter(|&j| j != i).map(|j| (sq_dist(x.row(i), x.row(j)), j)).collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    d.into_iter().take(k).map(|(_, j)| j).collect()
}

/// Generates `n_synthetic` samples by interpolating minority points toward one of
/// their `k_neighbors` nearest minority neighbors. Base points are cycled in order.
pub fn smote(minority: &Matrix, k_neighbors: usize, n_synthetic: usize, seed: u64) -> Result<SyntheticBatch> {
    let m = minority.rows();
    if m < 2 {
        return Err(Error::TooFewMinority(m));
    }
    if k_neighbors == 0 || k_neighbors > m - 1 {
        return Err(Error::BadNeighborCount { k: k_neighbors, minority: m });
    }
    let mut rng = seed::rng(seed, &[tag::SMOTE]);
    let bases_needed = n_synthetic.min(m);
    let neighbors: Vec<Vec<usize>> = (0..bases_needed).map(|i| nearest_neighbors(minority, i, k_neighbors)).collect();

    let mut samples = Matrix::zeros(n_synthetic, minority.cols());
    let mut parent_pairs = Vec::with_capacity(n_synthetic);
    let mut weights = Vec::with_capacity(n_synthetic);
    for s in 0..n_synthetic {
        let base = s % m;
        let nn = neighbors[base][rng.gen_range(0..k_neighbors)];
        let t: f64 = rng.gen();
        let (a, b) = (minority.row(base), minority.row(nn));
        for (c, out) in samples.row_mut(s).iter_mut().enumerate() {
            *out = a[c] + t * (b[c] - a[c]);
        }
        parent_pairs.push((base, nn));
        weights.push(t);
    }
    Ok(SyntheticBatch { samples, parent_pairs, weights, seed })
}

/// Where a row of a balanced training set came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Origin {
    /// Index into the training rows passed in.
    Original(usize),
    /// Interpolated between two training rows (indices into the training rows).
    Synthetic(usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalancedSet {
    pub x: Matrix,
    pub labels: Vec<bool>,
    pub origin: Vec<Origin>,
}

/// Oversamples the minority class of a training set up to parity with the majority.
///
/// `k_neighbors` is clipped to `minority - 1`.
pub fn balance_training_fold(x: &Matrix, labels: &[bool], k_neighbors: usize, seed: u64) -> Result<BalancedSet> {
    if x.rows() != labels.len() {
        return Err(Error::DimensionMismatch { expected: x.rows(), got: labels.len() });
    }
    let n_pos = labels.iter().filter(|&&p| p).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut out = BalancedSet { x: x.clone(), labels: labels.to_vec(), origin: (0..labels.len()).map(Origin::Original).collect() };
    if n_pos == n_neg {
        return Ok(out);
    }
    let minority_label = n_pos < n_neg;
    let minority_idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == minority_label).collect();
    let m = minority_idx.len();
    if m < 2 {
        return Err(Error::TooFewMinority(m));
    }
    let batch = smote(&x.select_rows(&minority_idx), k_neighbors.min(m - 1).max(1), n_pos.max(n_neg) - m, seed)?;
    for (s, &(a, b)) in batch.parent_pairs.iter().enumerate() {
        out.x.push_row(batch.samples.row(s))?;
        out.labels.push(minority_label);
        out.origin.push(Origin::Synthetic(minority_idx[a], minority_idx[b]));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn labels(pos: usize, neg: usize) -> Vec<bool> {
        let mut l = vec![true; pos];
        l.extend(vec![false; neg]);
        l
    }

    #[test]
    fn community_shaped_plan_is_stratified() {
        let l = labels(39, 431);
        let plan = stratified_kfold(&l, 10, 1, 42).unwrap();
        for fold in 0..10 {
            let test = plan.test_indices(FoldId { repeat: 0, fold });
            let p = test.iter().filter(|&&i| l[i]).count();
            assert!((3..=4).contains(&p), "fold {fold}: {p} positives");
            assert!((43..=44).contains(&(test.len() - p)));
        }
    }

    #[test]
    fn too_few_positives_for_k() {
        let err = stratified_kfold(&labels(8, 50), 10, 1, 1).unwrap_err();
        assert_eq!(err, Error::TooFewPerClass { class: "positive", count: 8, k: 10 });
        assert!(matches!(stratified_kfold(&labels(8, 50), 1, 1, 1), Err(Error::BadFoldConfig(_))));
        assert!(matches!(stratified_kfold(&labels(8, 50), 2, 0, 1), Err(Error::BadFoldConfig(_))));
    }

    #[test]
    fn plans_are_deterministic_and_repeats_differ() {
        let l = labels(20, 30);
        let a = stratified_kfold(&l, 5, 3, 7).unwrap();
        let b = stratified_kfold(&l, 5, 3, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.assignments[0], a.assignments[1]);
        assert_eq!(a.folds().count(), 15);
    }

    #[test]
    fn smote_segment_example() {
        let m = Matrix::from_rows(&[[0.0, 0.0], [1.0, 1.0]]).unwrap();
        let b = smote(&m, 1, 5, 3).unwrap();
        assert_eq!(b.samples.rows(), 5);
        for s in 0..5 {
            let r = b.samples.row(s);
            assert_eq!(r[0], r[1]);
            assert!((0.0..1.0).contains(&r[0]));
        }
    }

    #[test]
    fn smote_identical_points_and_empty_batch() {
        let m = Matrix::from_rows(&[[2.0, -1.0], [2.0, -1.0]]).unwrap();
        let b = smote(&m, 1, 4, 0).unwrap();
        assert!((0..4).all(|s| b.samples.row(s) == [2.0, -1.0]));
        let b = smote(&m, 1, 0, 0).unwrap();
        assert_eq!(b.samples.rows(), 0);
    }

    #[test]
    fn smote_argument_errors() {
        let one = Matrix::from_rows(&[[0.0]]).unwrap();
        assert_eq!(smote(&one, 1, 3, 0).unwrap_err(), Error::TooFewMinority(1));
        let two = Matrix::from_rows(&[[0.0], [1.0]]).unwrap();
        assert_eq!(smote(&two, 2, 3, 0).unwrap_err(), Error::BadNeighborCount { k: 2, minority: 2 });
        assert_eq!(smote(&two, 0, 3, 0).unwrap_err(), Error::BadNeighborCount { k: 0, minority: 2 });
    }

    #[test]
    fn balancing_reaches_parity() {
        let l = labels(35, 388);
        let x = Matrix::from_rows(&(0..l.len()).map(|i| [i as f64, (i % 7) as f64]).collect::<Vec<_>>()).unwrap();
        let b = balance_training_fold(&x, &l, DEFAULT_K_NEIGHBORS, 9).unwrap();
        assert_eq!(b.labels.iter().filter(|&&p| p).count(), 388);
        assert_eq!(b.labels.iter().filter(|&&p| !p).count(), 388);
        assert_eq!(b.x.rows(), 776);
        assert!(b.origin[..423].iter().enumerate().all(|(i, o)| *o == Origin::Original(i)));
        for o in &b.origin[423..] {
            let Origin::Synthetic(a, c) = *o else { panic!("expected synthetic") };
            assert!(l[a] && l[c]);
        }
    }

    #[test]
    fn balancing_noop_and_errors() {
        let l = labels(3, 3);
        let x = Matrix::from_rows(&(0..6).map(|i| [i as f64]).collect::<Vec<_>>()).unwrap();
        let b = balance_training_fold(&x, &l, 5, 0).unwrap();
        assert_eq!(b.x, x);
        assert_eq!(b.labels, l);

        let l = labels(1, 5);
        assert_eq!(balance_training_fold(&x, &l, 5, 0).unwrap_err(), Error::TooFewMinority(1));
        let l = labels(0, 6);
        assert_eq!(balance_training_fold(&x, &l, 5, 0).unwrap_err(), Error::SingleClass);
    }
}
