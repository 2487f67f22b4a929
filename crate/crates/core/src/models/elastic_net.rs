//! Penalized logistic regression fitted by cyclic coordinate descent over a
//! descending lambda path.
//!
//! Objective, with `eta = intercept + x . beta`:
//!
//! ```text
//! (1/n) sum_i [ ln(1 + e^eta_i) - y_i eta_i ] + lambda [ (1 - alpha)/2 |beta|^2 + alpha |beta|_1 ]
//! ```
//!
//! Each outer iteration builds the weighted quadratic (IRLS) model of the loss at
//! the current point and minimizes it plus the penalty by cyclic coordinate
//! descent with soft-thresholding. The resulting step is halved until the true
//! objective does not increase, so the objective trace is monotone.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{self, sigmoid, softplus};
use crate::matrix::Matrix;
use crate::metrics::auc;
use crate::resample::stratified_kfold;
use crate::seed::{self, tag};

/// Allowed objective increase between sweeps (floating-point slack).
pub const MONOTONE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaSelection {
    /// Inner stratified k-fold CV on the training data, maximizing mean AUC.
    CrossValidated { folds: usize },
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElasticNetConfig {
    /// Mixing between ridge (0) and lasso (1).
    pub alpha: f64,
    pub n_lambda: usize,
    pub lambda_min_ratio: f64,
    pub selection: LambdaSelection,
    pub max_sweeps: usize,
    /// Convergence: largest coefficient change in a sweep.
    pub tolerance: f64,
}

impl Default for ElasticNetConfig {
    fn default() -> Self {
        ElasticNetConfig {
            alpha: 1.0,
            n_lambda: 100,
            lambda_min_ratio: 1e-3,
            selection: LambdaSelection::CrossValidated { folds: 5 },
            max_sweeps: 10_000,
            tolerance: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub lambda: f64,
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub sweeps: usize,
    /// Objective before the first sweep and after every sweep.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub objective_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElasticNetModel {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub lambda_path: Vec<PathPoint>,
    /// Mean inner-CV AUC per path lambda, when selection was cross-validated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cv_auc: Option<Vec<f64>>,
}

impl ElasticNetModel {
    pub fn linear_predictor(&self, row: &[f64]) -> f64 {
        self.intercept + self.coefficients.iter().zip(row).map(|(b, x)| b * x).sum::<f64>()
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        sigmoid(self.linear_predictor(row))
    }
}

fn targets(labels: &[bool]) -> Vec<f64> {
    labels.iter().map(|&l| if l { 1.0 } else { 0.0 }).collect()
}

/// Smallest lambda at which every coefficient is zero.
pub fn lambda_max(x: &Matrix, labels: &[bool], alpha: f64) -> f64 {
    let y = targets(labels);
    let n = x.rows() as f64;
    let ybar = math::mean(&y);
    let g = (0..x.cols())
        .map(|j| libm::fabs((0..x.rows()).map(|i| x.get(i, j) * (y[i] - ybar)).sum::<f64>() / n))
        .fold(0.0, f64::max);
    g / alpha.max(1e-3)
}

/// Log-spaced descending path from `lambda_max` to `ratio * lambda_max`.
pub fn lambda_path(lmax: f64, n_lambda: usize, ratio: f64) -> Vec<f64> {
    if n_lambda <= 1 {
        return alloc::vec![lmax];
    }
    let step = libm::log(ratio) / (n_lambda - 1) as f64;
    (0..n_lambda).map(|k| lmax * libm::exp(step * k as f64)).collect()
}

fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

/// Smallest IRLS weight, keeping the quadratic model strictly convex near separation.
const MIN_WEIGHT: f64 = 1e-5;
/// Inner coordinate-descent sweeps per quadratic model.
const MAX_INNER_SWEEPS: usize = 1000;
/// Step halvings tried before an outer iteration is declared stalled.
const MAX_HALVINGS: usize = 60;

/// Mutable solver state.
struct Solver {
    /// Column-major copy of the design.
    cols: Vec<Vec<f64>>,
    y: Vec<f64>,
    alpha: f64,
    /// Largest |gradient| at the null model; `lambda * alpha` at or above it gives all zeros.
    null_gradient: f64,
    beta0: f64,
    beta: Vec<f64>,
    eta: Vec<f64>,
    /// Sum over rows of softplus(eta) - y * eta.
    loss_sum: f64,
}

impl Solver {
    fn new(x: &Matrix, labels: &[bool], alpha: f64) -> Self {
        let y = targets(labels);
        let beta0 = math::logit(math::mean(&y));
        let mut s = Solver {
            cols: (0..x.cols()).map(|j| x.column(j)).collect(),
            y,
            alpha,
            null_gradient: lambda_max(x, labels, 1.0),
            beta0,
            beta: alloc::vec![0.0; x.cols()],
            eta: alloc::vec![beta0; x.rows()],
            loss_sum: 0.0,
        };
        s.loss_sum = s.loss_at(&s.eta);
        s
    }

    fn n(&self) -> f64 {
        self.eta.len() as f64
    }

    fn loss_at(&self, eta: &[f64]) -> f64 {
        eta.iter().zip(&self.y).map(|(&e, &y)| softplus(e) - y * e).sum()
    }

    fn penalty_of(&self, beta: &[f64], lambda: f64) -> f64 {
        let (l1, l2) = beta.iter().fold((0.0, 0.0), |(a, b), v| (a + libm::fabs(*v), b + v * v));
        lambda * ((1.0 - self.alpha) / 2.0 * l2 + self.alpha * l1)
    }

    fn objective(&self, lambda: f64) -> f64 {
        self.loss_sum / self.n() + self.penalty_of(&self.beta, lambda)
    }

    /// Minimizes the penalized quadratic model of the loss at the current point by
    /// cyclic coordinate descent. Returns the proposed (intercept, coefficients).
    fn quadratic_step(&self, lambda: f64, tol: f64) -> (f64, Vec<f64>) {
        let n = self.n();
        let w: Vec<f64> = self.eta.iter().map(|&e| { let p = sigmoid(e); (p * (1.0 - p)).max(MIN_WEIGHT) }).collect();
        // residual of the working response against the current linear predictor
        let mut r: Vec<f64> = self.eta.iter().zip(&self.y).zip(&w).map(|((&e, &y), &wi)| (y - sigmoid(e)) / wi).collect();
        let curv: Vec<f64> = self.cols.iter().map(|c| c.iter().zip(&w).map(|(v, wi)| wi * v * v).sum::<f64>() / n).collect();
        let w_sum: f64 = w.iter().sum();
        let (l1, l2) = (lambda * self.alpha, lambda * (1.0 - self.alpha));
        let mut b0 = self.beta0;
        let mut beta = self.beta.clone();

        for _ in 0..MAX_INNER_SWEEPS {
            let d0 = w.iter().zip(&r).map(|(wi, ri)| wi * ri).sum::<f64>() / w_sum;
            b0 += d0;
            r.iter_mut().for_each(|ri| *ri -= d0);
            let mut max_change = libm::fabs(d0);
            for (j, col) in self.cols.iter().enumerate() {
                if curv[j] + l2 <= 0.0 {
                    continue;
                }
                let g = col.iter().zip(&w).zip(&r).map(|((v, wi), ri)| v * wi * ri).sum::<f64>() / n;
                let new = soft_threshold(curv[j] * beta[j] + g, l1) / (curv[j] + l2);
                let d = new - beta[j];
                if d != 0.0 {
                    beta[j] = new;
                    for (ri, v) in r.iter_mut().zip(col) {
                        *ri -= d * v;
                    }
                    max_change = max_change.max(libm::fabs(d));
                }
            }
            if max_change < tol {
                break;
            }
        }
        (b0, beta)
    }

    /// One outer iteration: quadratic step, then step halving until the true
    /// objective does not increase. Returns the largest applied coefficient change.
    fn iterate(&mut self, lambda: f64, tol: f64) -> f64 {
        let (b0, beta) = self.quadratic_step(lambda, tol);
        let d0 = b0 - self.beta0;
        let d: Vec<f64> = beta.iter().zip(&self.beta).map(|(a, b)| a - b).collect();
        let step_size = d.iter().fold(libm::fabs(d0), |m, v| m.max(libm::fabs(*v)));
        if step_size == 0.0 {
            return 0.0;
        }
        let current = self.objective(lambda);
        let mut t = 1.0;
        for _ in 0..MAX_HALVINGS {
            let trial_beta: Vec<f64> = self.beta.iter().zip(&d).map(|(b, dj)| b + t * dj).collect();
            let trial_b0 = self.beta0 + t * d0;
            let eta: Vec<f64> = (0..self.eta.len())
                .map(|i| trial_b0 + self.cols.iter().zip(&trial_beta).map(|(c, b)| c[i] * b).sum::<f64>())
                .collect();
            let loss = self.loss_at(&eta);
            if loss / self.n() + self.penalty_of(&trial_beta, lambda) <= current {
                self.beta0 = trial_b0;
                self.beta = trial_beta;
                self.eta = eta;
                self.loss_sum = loss;
                return t * step_size;
            }
            t *= 0.5;
        }
        0.0
    }

    fn reset_to_null(&mut self) {
        self.beta0 = math::logit(math::mean(&self.y));
        self.beta.iter_mut().for_each(|b| *b = 0.0);
        self.eta.iter_mut().for_each(|e| *e = self.beta0);
        self.loss_sum = self.loss_at(&self.eta);
    }

    /// Iterates to convergence at `lambda`, warm-started from the current state.
    fn solve(&mut self, lambda: f64, max_sweeps: usize, tol: f64) -> Result<PathPoint> {
        let mut trace = alloc::vec![self.objective(lambda)];
        if self.alpha > 0.0 && lambda * self.alpha >= self.null_gradient {
            // the null model is the exact solution; skip rounding noise near the threshold
            self.reset_to_null();
            trace.push(self.objective(lambda));
            return Ok(PathPoint { lambda, intercept: self.beta0, coefficients: self.beta.clone(), sweeps: 1, objective_trace: trace });
        }
        let mut sweeps = 0;
        while sweeps < max_sweeps {
            sweeps += 1;
            let change = self.iterate(lambda, tol);
            let obj = self.objective(lambda);
            if !obj.is_finite() {
                return Err(Error::NonFinite { stage: "coordinate-descent sweep", index: sweeps });
            }
            let prev = *trace.last().expect("non-empty");
            debug_assert!(obj <= prev + MONOTONE_TOL, "objective rose from {prev} to {obj}");
            trace.push(obj);
            if change < tol {
                break;
            }
        }
        Ok(PathPoint { lambda, intercept: self.beta0, coefficients: self.beta.clone(), sweeps, objective_trace: trace })
    }
}

fn validate(x: &Matrix, labels: &[bool], alpha: f64) -> Result<()> {
    if x.rows() != labels.len() {
        return Err(Error::DimensionMismatch { expected: x.rows(), got: labels.len() });
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::BadHyperparameter(alloc::format!("alpha = {alpha} outside [0, 1]")));
    }
    if !labels.iter().any(|&l| l) || labels.iter().all(|&l| l) {
        return Err(Error::SingleClass);
    }
    if !x.is_finite() {
        return Err(Error::NonFiniteInput);
    }
    Ok(())
}

/// Fits the whole path `lambdas` (must be descending) with warm starts.
pub fn fit_path(x: &Matrix, labels: &[bool], alpha: f64, lambdas: &[f64], max_sweeps: usize, tol: f64) -> Result<Vec<PathPoint>> {
    validate(x, labels, alpha)?;
    let mut solver = Solver::new(x, labels, alpha);
    lambdas.iter().map(|&l| solver.solve(l, max_sweeps, tol)).collect()
}

fn cv_select(x: &Matrix, labels: &[bool], config: &ElasticNetConfig, lambdas: &[f64], folds: usize, seed: u64) -> Result<(usize, Vec<f64>)> {
    let minority = labels.iter().filter(|&&l| l).count().min(labels.iter().filter(|&&l| !l).count());
    let k = folds.min(minority);
    if k < 2 {
        // not enough data for inner CV: least regularized point
        return Ok((lambdas.len() - 1, Vec::new()));
    }
    let plan = stratified_kfold(labels, k, 1, seed::derive(seed, &[tag::INNER_CV]))?;
    let mut sum_auc = alloc::vec![0.0; lambdas.len()];
    for id in plan.folds() {
        let train = plan.train_indices(id);
        let test = plan.test_indices(id);
        let xt = x.select_rows(&train);
        let lt: Vec<bool> = train.iter().map(|&i| labels[i]).collect();
        let lv: Vec<bool> = test.iter().map(|&i| labels[i]).collect();
        let path = fit_path(&xt, &lt, config.alpha, lambdas, config.max_sweeps, config.tolerance)?;
        for (k, p) in path.iter().enumerate() {
            let m = ElasticNetModel {
                coefficients: p.coefficients.clone(),
                intercept: p.intercept,
                lambda: p.lambda,
                alpha: config.alpha,
                lambda_path: Vec::new(),
                cv_auc: None,
            };
            let scores: Vec<f64> = test.iter().map(|&i| m.linear_predictor(x.row(i))).collect();
            sum_auc[k] += auc(&scores, &lv)?;
        }
    }
    let mean: Vec<f64> = sum_auc.iter().map(|s| s / k as f64).collect();
    // first maximum = largest lambda among ties
    let best = mean
        .iter()
        .enumerate()
        .fold(0, |b, (i, &v)| if v > mean[b] { i } else { b });
    Ok((best, mean))
}

/// Trains the penalized logistic model and picks a lambda.
pub fn train_elastic_net(x: &Matrix, labels: &[bool], config: &ElasticNetConfig, seed: u64) -> Result<ElasticNetModel> {
    validate(x, labels, config.alpha)?;
    if config.n_lambda == 0 || !(config.lambda_min_ratio > 0.0 && config.lambda_min_ratio < 1.0) {
        return Err(Error::BadHyperparameter("lambda path needs n_lambda >= 1 and 0 < lambda_min_ratio < 1".into()));
    }
    let lmax = lambda_max(x, labels, config.alpha);
    let mut lambdas = lambda_path(lmax, config.n_lambda, config.lambda_min_ratio);

    let (selected, cv_auc) = match config.selection {
        LambdaSelection::Fixed(l) if !(l >= 0.0) => {
            return Err(Error::BadHyperparameter(alloc::format!("lambda = {l} must be >= 0")));
        }
        LambdaSelection::Fixed(l) if l >= lmax => {
            lambdas = alloc::vec![l];
            (0, None)
        }
        LambdaSelection::Fixed(l) => {
            lambdas.retain(|&v| v > l);
            lambdas.push(l);
            (lambdas.len() - 1, None)
        }
        LambdaSelection::CrossValidated { folds } => {
            let (i, mean) = cv_select(x, labels, config, &lambdas, folds, seed)?;
            (i, (!mean.is_empty()).then_some(mean))
        }
    };

    let path = fit_path(x, labels, config.alpha, &lambdas, config.max_sweeps, config.tolerance)?;
    let chosen = &path[selected];
    Ok(ElasticNetModel {
        coefficients: chosen.coefficients.clone(),
        intercept: chosen.intercept,
        lambda: chosen.lambda,
        alpha: config.alpha,
        cv_auc,
        lambda_path: path,
    })
}
