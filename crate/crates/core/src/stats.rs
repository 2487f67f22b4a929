//! Wilcoxon rank-sum screening and box-plot summaries.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::{BloodCountRecord, Feature};
use crate::error::{Error, Result};
use crate::math;

/// Largest combined sample size for which the exact null distribution is used.
pub const EXACT_MAX_N: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankSumMethod {
    Exact,
    NormalApprox,
}

/// Which computation to use for the p-value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodChoice {
    /// Exact when `n1 + n2 <= 20` and there are no ties, otherwise normal.
    Auto,
    Exact,
    NormalApprox,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankSumResult {
    /// Sum of the ranks of the first sample.
    pub w_statistic: f64,
    pub u_statistic: f64,
    pub p_value: f64,
    pub method: RankSumMethod,
    pub n1: usize,
    pub n2: usize,
}

/// Mid-ranks (1-based) of `values` and the sizes of every tie group.
pub fn mid_ranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = alloc::vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j share ranks i+1..=j
        let r = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = r;
        }
        if j - i > 1 {
            ties.push(j - i);
        }
        i = j;
    }
    (ranks, ties)
}

/// Two-sided Wilcoxon rank-sum (Mann-Whitney) test of `x` against `y`.
pub fn wilcoxon_rank_sum(x: &[f64], y: &[f64]) -> Result<RankSumResult> {
    wilcoxon_rank_sum_with(x, y, MethodChoice::Auto)
}

pub fn wilcoxon_rank_sum_with(x: &[f64], y: &[f64], choice: MethodChoice) -> Result<RankSumResult> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySample);
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    let (n1, n2) = (x.len(), y.len());
    let n = n1 + n2;
    let mut pooled = Vec::with_capacity(n);
    pooled.extend_from_slice(x);
    pooled.extend_from_slice(y);
    let (ranks, ties) = mid_ranks(&pooled);
    let w: f64 = ranks[..n1].iter().sum();
    let u = w - (n1 * (n1 + 1)) as f64 / 2.0;

    let method = match choice {
        MethodChoice::Auto if n <= EXACT_MAX_N && ties.is_empty() => RankSumMethod::Exact,
        MethodChoice::Auto => RankSumMethod::NormalApprox,
        MethodChoice::Exact if ties.is_empty() => RankSumMethod::Exact,
        MethodChoice::Exact => return Err(Error::BadHyperparameter("exact rank-sum test requires tie-free samples".into())),
        MethodChoice::NormalApprox => RankSumMethod::NormalApprox,
    };
    let p = match method {
        RankSumMethod::Exact => exact_two_sided(n1, n2, u),
        RankSumMethod::NormalApprox => normal_two_sided(n1, n2, u, &ties),
    };
    Ok(RankSumResult { w_statistic: w, u_statistic: u, p_value: p.clamp(f64::MIN_POSITIVE, 1.0), method, n1, n2 })
}

/// Null distribution of U: `counts[u]` = number of rank subsets of size n1 with that U.
fn u_distribution(n1: usize, n2: usize) -> Vec<f64> {
    // Partitions of u into at most n1 parts each at most n2, by the standard recurrence
    // over (members placed, largest allowed value).
    let max_u = n1 * n2;
    // table[i][u] over the first i members with values in 0..=n2 nondecreasing
    let mut prev = alloc::vec![alloc::vec![0.0f64; max_u + 1]; n2 + 1];
    for row in prev.iter_mut() {
        row[0] = 1.0;
    }
    for i in 1..=n1 {
        let mut cur = alloc::vec![alloc::vec![0.0f64; max_u + 1]; n2 + 1];
        for m in 0..=n2 {
            for u in 0..=(i * m).min(max_u) {
                // largest part < m, or largest part == m
                let mut c = if m > 0 { cur[m - 1][u] } else { 0.0 };
                if u >= m {
                    c += prev[m][u - m];
                }
                cur[m][u] = c;
            }
        }
        prev = cur;
    }
    prev.swap_remove(n2)
}

fn exact_two_sided(n1: usize, n2: usize, u: f64) -> f64 {
    let dist = u_distribution(n1, n2);
    let total: f64 = dist.iter().sum();
    let u = libm::round(u) as usize;
    let lower: f64 = dist[..=u].iter().sum::<f64>() / total;
    let upper: f64 = dist[u..].iter().sum::<f64>() / total;
    (2.0 * lower.min(upper)).min(1.0)
}

fn normal_two_sided(n1: usize, n2: usize, u: f64, ties: &[usize]) -> f64 {
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let n = n1f + n2f;
    let tie_term: f64 = ties.iter().map(|&t| {
        let t = t as f64;
        t * t * t - t
    }).sum();
    let var = n1f * n2f / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if var <= 0.0 {
        return 1.0;
    }
    let dev = (libm::fabs(u - n1f * n2f / 2.0) - 0.5).max(0.0);
    (2.0 * math::normal_sf(dev / libm::sqrt(var))).min(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxSummary {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
    pub n: usize,
}

/// Quantile of already sorted data by linear interpolation at position `1 + (n-1)q`.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Tukey box-plot statistics. Returns `None` for empty input.
pub fn boxplot_summary(values: &[f64]) -> Option<BoxSummary> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&v, 0.25);
    let median = quantile_sorted(&v, 0.5);
    let q3 = quantile_sorted(&v, 0.75);
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside = || v.iter().copied().filter(|&x| x >= lo_fence && x <= hi_fence);
    let whisker_low = inside().next().unwrap_or(q1);
    let whisker_high = inside().last().unwrap_or(q3);
    let outliers = v.iter().copied().filter(|&x| x < lo_fence || x > hi_fence).collect();
    Some(BoxSummary { median, q1, q3, whisker_low, whisker_high, outliers, n: v.len() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increased,
    Decreased,
    Unchanged,
}

impl Direction {
    fn of(diff: f64) -> Self {
        if diff > 0.0 {
            Direction::Increased
        } else if diff < 0.0 {
            Direction::Decreased
        } else {
            Direction::Unchanged
        }
    }
}

/// Positive-vs-negative comparison of one variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenRow {
    pub variable: alloc::string::String,
    pub direction: Direction,
    pub p_value: f64,
    pub test: RankSumResult,
    pub positive: BoxSummary,
    pub negative: BoxSummary,
}

impl ScreenRow {
    pub fn significant(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

/// Rank-sum test of the positive values against the negative values.
pub fn screen_values(variable: &str, values: &[f64], positive: &[bool]) -> Result<ScreenRow> {
    let pos: Vec<f64> = values.iter().zip(positive).filter(|(_, &p)| p).map(|(v, _)| *v).collect();
    let neg: Vec<f64> = values.iter().zip(positive).filter(|(_, &p)| !p).map(|(v, _)| *v).collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::SingleClassCohort);
    }
    let test = wilcoxon_rank_sum(&pos, &neg)?;
    let positive = boxplot_summary(&pos).expect("non-empty");
    let negative = boxplot_summary(&neg).expect("non-empty");
    Ok(ScreenRow {
        variable: variable.into(),
        direction: Direction::of(positive.median - negative.median),
        p_value: test.p_value,
        test,
        positive,
        negative,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceTable {
    /// One row per modeled feature, ascending p (ties in canonical feature order).
    pub rows: Vec<ScreenRow>,
    /// Neutrophils, tested over the records that report them.
    pub neutrophils: Option<ScreenRow>,
}

impl SignificanceTable {
    pub fn significant(&self, alpha: f64) -> impl Iterator<Item = &ScreenRow> {
        self.rows.iter().filter(move |r| r.significant(alpha))
    }

    pub fn row(&self, feature: Feature) -> Option<&ScreenRow> {
        self.rows.iter().find(|r| r.variable == feature.name())
    }
}

pub fn significance_table(records: &[BloodCountRecord]) -> Result<SignificanceTable> {
    let labels: Vec<bool> = records.iter().map(|r| r.is_positive()).collect();
    if !labels.iter().any(|&p| p) || labels.iter().all(|&p| p) {
        return Err(Error::SingleClassCohort);
    }
    let mut rows = Vec::with_capacity(Feature::ALL.len());
    for f in Feature::ALL {
        let values: Vec<f64> = records.iter().map(|r| r.features.get(f)).collect();
        rows.push(screen_values(f.name(), &values, &labels)?);
    }
    // stable sort keeps canonical order among equal p-values
    rows.sort_by(|a, b| a.p_value.total_cmp(&b.p_value));

    let (nv, nl): (Vec<f64>, Vec<bool>) =
        records.iter().filter_map(|r| r.neutrophils.map(|v| (v, r.is_positive()))).unzip();
    let neutrophils = screen_values("neutrophils", &nv, &nl).ok();
    Ok(SignificanceTable { rows, neutrophils })
}
