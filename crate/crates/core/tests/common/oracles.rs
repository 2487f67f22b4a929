//! Independent reference implementations used to check the library.
//!
//! Each oracle takes the slow, obvious route: pairwise counting, subset
//! enumeration, dense Newton steps, finite differences.

#![allow(dead_code)]

use hemascreen_core::models::AnnModel;
use hemascreen_core::Matrix;

/// Fraction of (positive, negative) pairs won by the positive; ties count half.
pub fn pairwise_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &si) in scores.iter().enumerate() {
        if !labels[i] {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] {
                continue;
            }
            pairs += 1.0;
            if si > sj {
                wins += 1.0;
            } else if si == sj {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// Two-sided exact rank-sum p-value by listing every way to give `x.len()` of the
/// pooled ranks to the first sample. Tie-free input only.
pub fn enumerated_rank_sum_p(x: &[f64], y: &[f64]) -> f64 {
    let mut pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    pooled.sort_by(f64::total_cmp);
    let rank = |v: f64| (pooled.iter().position(|&p| p == v).unwrap() + 1) as u64;
    let n1 = x.len();
    let n = pooled.len();
    let base = (n1 * (n1 + 1) / 2) as u64;
    let observed: u64 = x.iter().map(|&v| rank(v)).sum::<u64>() - base;

    let (mut lower, mut upper, mut total) = (0u64, 0u64, 0u64);
    for mask in 0u64..(1 << n) {
        if mask.count_ones() as usize != n1 {
            continue;
        }
        let w: u64 = (0..n).filter(|b| mask >> b & 1 == 1).map(|b| b as u64 + 1).sum();
        let u = w - base;
        total += 1;
        if u <= observed {
            lower += 1;
        }
        if u >= observed {
            upper += 1;
        }
    }
    let lower = lower as f64 / total as f64;
    let upper = upper as f64 / total as f64;
    (2.0 * lower.min(upper)).min(1.0)
}

/// Unpenalized logistic regression with intercept by Newton-Raphson (IRLS).
/// Returns (intercept, coefficients).
pub fn irls_logistic(x: &Matrix, labels: &[bool]) -> (f64, Vec<f64>) {
    let (n, p) = (x.rows(), x.cols());
    let d = p + 1;
    let mut beta = vec![0.0; d];
    let design = |i: usize, j: usize| if j == 0 { 1.0 } else { x.get(i, j - 1) };
    for _ in 0..100 {
        let mut grad = vec![0.0; d];
        let mut hess = vec![vec![0.0; d]; d];
        for i in 0..n {
            let eta: f64 = (0..d).map(|j| design(i, j) * beta[j]).sum();
            let mu = 1.0 / (1.0 + (-eta).exp());
            let y = if labels[i] { 1.0 } else { 0.0 };
            let w = mu * (1.0 - mu);
            for j in 0..d {
                grad[j] += design(i, j) * (y - mu);
                for k in 0..d {
                    hess[j][k] += w * design(i, j) * design(i, k);
                }
            }
        }
        let step = solve(hess, grad);
        let size = step.iter().fold(0.0f64, |m, s| m.max(s.abs()));
        for (b, s) in beta.iter_mut().zip(&step) {
            *b += s;
        }
        if size < 1e-13 {
            break;
        }
    }
    (beta[0], beta[1..].to_vec())
}

/// Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// Central-difference gradient of the mean training loss.
pub fn finite_difference_gradient(model: &AnnModel, x: &Matrix, y: &[f64], rows: &[usize], h: f64) -> Vec<f64> {
    let base = model.parameters();
    let mut probe = model.clone();
    (0..base.len())
        .map(|i| {
            let mut p = base.clone();
            p[i] = base[i] + h;
            probe.set_parameters(&p).unwrap();
            let up = probe.loss_and_gradient(x, y, rows).0;
            p[i] = base[i] - h;
            probe.set_parameters(&p).unwrap();
            let down = probe.loss_and_gradient(x, y, rows).0;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Largest `|a - b| / max(|a|, |b|, floor)` over paired entries.
pub fn max_relative_error(a: &[f64], b: &[f64], floor: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(floor)).fold(0.0, f64::max)
}

/// Solves `sample = a + t (b - a)` coordinate-wise. Returns the common `t`
/// when every informative coordinate agrees within `tol` and the rest match `a`.
pub fn segment_parameter(sample: &[f64], a: &[f64], b: &[f64], tol: f64) -> Option<f64> {
    let mut t: Option<f64> = None;
    for c in 0..sample.len() {
        let span = b[c] - a[c];
        if span.abs() < 1e-12 {
            if (sample[c] - a[c]).abs() > tol {
                return None;
            }
            continue;
        }
        let tc = (sample[c] - a[c]) / span;
        match t {
            None => t = Some(tc),
            Some(t0) if (t0 - tc).abs() > tol => return None,
            _ => {}
        }
    }
    Some(t.unwrap_or(0.0))
}
