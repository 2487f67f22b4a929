//! Random forest of Gini-split classification trees grown on bootstrap samples.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::seed::{self, tag};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Features tried per split; `None` means `floor(sqrt(n_features))`.
    pub mtry: Option<usize>,
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
    /// Grow each tree on a bootstrap resample; otherwise on every training row.
    pub bootstrap: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig { n_trees: 500, mtry: None, min_leaf: 1, max_depth: None, bootstrap: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    /// Go left iff `value <= threshold`.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    /// Probability of the positive class.
    Leaf { p_positive: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    /// Root is `nodes[0]`.
    pub nodes: Vec<Node>,
    pub seed: u64,
}

impl Tree {
    pub fn leaf(p_positive: f64) -> Self {
        Tree { nodes: alloc::vec![Node::Leaf { p_positive }], seed: 0 }
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { p_positive } => return p_positive,
                Node::Split { feature, threshold, left, right } => {
                    at = if row[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, at: usize) -> usize {
            match t.nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(t, left).max(go(t, right)),
            }
        }
        go(self, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForestModel {
    pub trees: Vec<Tree>,
    pub n_trees: usize,
    pub mtry: usize,
    pub min_leaf: usize,
    pub n_features: usize,
}

impl RandomForestModel {
    /// Mean of the trees' leaf probabilities.
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(row)).sum::<f64>() / self.trees.len() as f64
    }

    /// Majority vote of the trees' hard decisions; a tied vote falls back to the mean probability.
    pub fn predict_vote(&self, row: &[f64]) -> bool {
        let pos = self.trees.iter().filter(|t| t.predict(row) > 0.5).count();
        let neg = self.trees.iter().filter(|t| t.predict(row) < 0.5).count();
        match pos.cmp(&neg) {
            core::cmp::Ordering::Greater => true,
            core::cmp::Ordering::Less => false,
            core::cmp::Ordering::Equal => self.predict_row(row) >= 0.5,
        }
    }
}

fn gini(pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = pos as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

struct Grower<'a> {
    x: &'a Matrix,
    y: &'a [bool],
    mtry: usize,
    min_leaf: usize,
    max_depth: usize,
    nodes: Vec<Node>,
    features: Vec<usize>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl Grower<'_> {
    /// Best split of `idx` on `feature`, minimizing the weighted child impurity.
    fn split_on(&self, idx: &mut [usize], feature: usize) -> Option<BestSplit> {
        idx.sort_by(|&a, &b| self.x.get(a, feature).total_cmp(&self.x.get(b, feature)));
        let n = idx.len();
        let total_pos = idx.iter().filter(|&&i| self.y[i]).count();
        let mut left_pos = 0;
        let mut best: Option<BestSplit> = None;
        for k in 1..n {
            if self.y[idx[k - 1]] {
                left_pos += 1;
            }
            let (a, b) = (self.x.get(idx[k - 1], feature), self.x.get(idx[k], feature));
            if a == b || k < self.min_leaf || n - k < self.min_leaf {
                continue;
            }
            let score = k as f64 * gini(left_pos, k) + (n - k) as f64 * gini(total_pos - left_pos, n - k);
            if best.as_ref().is_none_or(|s| score < s.score) {
                let mut threshold = a + (b - a) / 2.0;
                if threshold >= b {
                    threshold = a;
                }
                best = Some(BestSplit { feature, threshold, score });
            }
        }
        best
    }

    fn grow(&mut self, idx: &mut [usize], depth: usize, rng: &mut seed::Rng) -> usize {
        let n = idx.len();
        let pos = idx.iter().filter(|&&i| self.y[i]).count();
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { p_positive: pos as f64 / n as f64 });
        if pos == 0 || pos == n || n < 2 * self.min_leaf || depth >= self.max_depth {
            return id;
        }

        // Try mtry random features; if none of them can split (all constant),
        // keep drawing from the rest.
        self.features.shuffle(rng);
        let mut best: Option<BestSplit> = None;
        for fi in 0..self.features.len() {
            if fi >= self.mtry && best.is_some() {
                break;
            }
            let f = self.features[fi];
            if let Some(s) = self.split_on(idx, f) {
                if best.as_ref().is_none_or(|b| s.score < b.score) {
                    best = Some(s);
                }
            }
        }
        let Some(split) = best else { return id };

        // partition in place: left = value <= threshold
        let mut mid = 0;
        for k in 0..n {
            if self.x.get(idx[k], split.feature) <= split.threshold {
                idx.swap(k, mid);
                mid += 1;
            }
        }
        let (l, r) = idx.split_at_mut(mid);
        let left = self.grow(l, depth + 1, rng);
        let right = self.grow(r, depth + 1, rng);
        self.nodes[id] = Node::Split { feature: split.feature, threshold: split.threshold, left, right };
        id
    }
}

/// Grows one tree on exactly the rows `idx` (no bootstrap). Single-class input yields one leaf.
pub fn grow_tree(x: &Matrix, y: &[bool], idx: &[usize], mtry: usize, min_leaf: usize, max_depth: Option<usize>, seed: u64) -> Tree {
    let mut g = Grower {
        x,
        y,
        mtry: mtry.clamp(1, x.cols().max(1)),
        min_leaf: min_leaf.max(1),
        max_depth: max_depth.unwrap_or(usize::MAX),
        nodes: Vec::new(),
        features: (0..x.cols()).collect(),
    };
    let mut rng = seed::rng(seed, &[tag::SHUFFLE]);
    let mut idx = idx.to_vec();
    if idx.is_empty() {
        return Tree::leaf(0.5);
    }
    g.grow(&mut idx, 0, &mut rng);
    Tree { nodes: g.nodes, seed }
}

pub fn train_random_forest(x: &Matrix, labels: &[bool], config: &ForestConfig, seed: u64) -> Result<RandomForestModel> {
    if x.rows() != labels.len() {
        return Err(Error::DimensionMismatch { expected: x.rows(), got: labels.len() });
    }
    if !labels.iter().any(|&l| l) || labels.iter().all(|&l| l) {
        return Err(Error::SingleClass);
    }
    let p = x.cols();
    let mtry = config.mtry.unwrap_or_else(|| (libm::floor(libm::sqrt(p as f64)) as usize).max(1));
    if config.n_trees == 0 || mtry == 0 || mtry > p || config.min_leaf == 0 {
        return Err(Error::BadHyperparameter(alloc::format!(
            "n_trees = {}, mtry = {mtry}, min_leaf = {} (need n_trees >= 1, 1 <= mtry <= {p}, min_leaf >= 1)",
            config.n_trees, config.min_leaf
        )));
    }
    let n = x.rows();
    let trees = (0..config.n_trees)
        .map(|t| {
            let tree_seed = seed::derive(seed, &[tag::BOOTSTRAP, t as u64]);
            let mut rng = seed::rng(tree_seed, &[]);
            let sample: Vec<usize> =
                if config.bootstrap { (0..n).map(|_| rng.gen_range(0..n)).collect() } else { (0..n).collect() };
            grow_tree(x, labels, &sample, mtry, config.min_leaf, config.max_depth, tree_seed)
        })
        .collect();
    Ok(RandomForestModel { trees, n_trees: config.n_trees, mtry, min_leaf: config.min_leaf, n_features: p })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stump(threshold: f64, left: f64, right: f64) -> Tree {
        Tree {
            nodes: alloc::vec![
                Node::Split { feature: 0, threshold, left: 1, right: 2 },
                Node::Leaf { p_positive: left },
                Node::Leaf { p_positive: right },
            ],
            seed: 0,
        }
    }

    #[test]
    fn majority_vote_is_the_mode() {
        let forest = RandomForestModel {
            trees: alloc::vec![Tree::leaf(1.0), Tree::leaf(0.9), Tree::leaf(0.0)],
            n_trees: 3,
            mtry: 1,
            min_leaf: 1,
            n_features: 1,
        };
        assert!(forest.predict_vote(&[0.0]));
        let forest = RandomForestModel { trees: alloc::vec![stump(0.0, 0.0, 1.0); 3], ..forest };
        assert!(forest.predict_vote(&[1.0]));
        assert!(!forest.predict_vote(&[-1.0]));
    }

    #[test]
    fn pure_training_rows_make_a_single_leaf() {
        let x = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0], [0.5, 0.1]]).unwrap();
        let t = grow_tree(&x, &[true, true, true], &[0, 1, 2], 2, 1, None, 1);
        assert_eq!(t.nodes, alloc::vec![Node::Leaf { p_positive: 1.0 }]);
        assert_eq!(t.predict(&[9.0, 9.0]), 1.0);
    }

    #[test]
    fn single_tree_memorizes_distinct_rows() {
        let rows: Vec<[f64; 3]> = (0..30).map(|i| [libm::sin(i as f64), libm::cos(1.3 * i as f64), (i % 4) as f64]).collect();
        let y: Vec<bool> = (0..30).map(|i| (i * 7 + i / 3) % 5 < 2).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let all: Vec<usize> = (0..30).collect();
        let t = grow_tree(&x, &y, &all, 3, 1, None, 5);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(t.predict(r) > 0.5, y[i]);
        }
    }

    #[test]
    fn leaves_respect_min_leaf_and_bounds() {
        let rows: Vec<[f64; 2]> = (0..50).map(|i| [i as f64, ((i * 13) % 7) as f64]).collect();
        let y: Vec<bool> = (0..50).map(|i| i % 3 == 0).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let m = train_random_forest(&x, &y, &ForestConfig { n_trees: 10, mtry: Some(1), min_leaf: 5, ..Default::default() }, 2).unwrap();
        for t in &m.trees {
            for node in &t.nodes {
                match *node {
                    Node::Leaf { p_positive } => assert!((0.0..=1.0).contains(&p_positive)),
                    Node::Split { feature, .. } => assert!(feature < 2),
                }
            }
        }
        assert_eq!(m.mtry, 1);
    }

    #[test]
    fn config_errors() {
        let x = Matrix::from_rows(&[[0.0], [1.0]]).unwrap();
        assert_eq!(train_random_forest(&x, &[true, true], &ForestConfig::default(), 0).unwrap_err(), Error::SingleClass);
        let bad = ForestConfig { mtry: Some(2), ..Default::default() };
        assert!(matches!(train_random_forest(&x, &[true, false], &bad, 0), Err(Error::BadHyperparameter(_))));
    }

    #[test]
    fn training_is_reproducible() {
        let rows: Vec<[f64; 2]> = (0..40).map(|i| [libm::sin(i as f64), libm::cos(i as f64 * 0.7)]).collect();
        let y: Vec<bool> = rows.iter().map(|r| r[0] + r[1] > 0.2).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let cfg = ForestConfig { n_trees: 20, ..Default::default() };
        assert_eq!(train_random_forest(&x, &y, &cfg, 11).unwrap(), train_random_forest(&x, &y, &cfg, 11).unwrap());
        assert_ne!(train_random_forest(&x, &y, &cfg, 11).unwrap(), train_random_forest(&x, &y, &cfg, 12).unwrap());
    }
}
