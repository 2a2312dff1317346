//! GOSPA and cutoff RMSE scoring of DOA sets, with optimal assignment.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// Cutoffs in degrees.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricConfig {
    pub c: f64,
    pub c_prime: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self { c: 10.0, c_prime: 10.0 }
    }
}

impl MetricConfig {
    pub fn new(c: f64, c_prime: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite() && c_prime > 0.0 && c_prime.is_finite()) {
            return Err(Error::InvalidConfig("metric cutoffs must be positive"));
        }
        Ok(Self { c, c_prime })
    }
}

/// GOSPA total with its localization, missed and false parts.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GospaBreakdown {
    pub total: f64,
    pub dist: f64,
    pub miss: f64,
    pub false_: f64,
}

/// Minimum-cost matching of every row (`rows <= cols`) or every column
/// (`cols < rows`) of a rectangular cost matrix. Returns `(row, col)` pairs
/// sorted by row.
pub fn assign(cost: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let rows = cost.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = cost[0].len();
    if cols == 0 {
        return Vec::new();
    }
    if rows <= cols {
        hungarian(rows, cols, |i, j| cost[i][j])
    } else {
        let mut pairs: Vec<(usize, usize)> =
            hungarian(cols, rows, |i, j| cost[j][i]).into_iter().map(|(c, r)| (r, c)).collect();
        pairs.sort_unstable();
        pairs
    }
}

// Shortest augmenting path with row/column potentials, n <= m.
fn hungarian(n: usize, m: usize, a: impl Fn(usize, usize) -> f64) -> Vec<(usize, usize)> {
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = a(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut pairs: Vec<(usize, usize)> = (1..=m).filter(|&j| p[j] != 0).map(|j| (p[j] - 1, j - 1)).collect();
    pairs.sort_unstable();
    pairs
}

/// Optimal pairs with distance at most `cutoff`, using `cost(d)` for an
/// assignable pair and `cost(cutoff)` as the price of leaving both apart.
fn matched_pairs(truth: &[f64], est: &[f64], cutoff: f64, cost: impl Fn(f64) -> f64) -> Vec<(usize, usize)> {
    let matrix: Vec<Vec<f64>> =
        truth.iter().map(|t| est.iter().map(|e| cost((t - e).abs().min(cutoff))).collect()).collect();
    assign(&matrix).into_iter().filter(|&(i, j)| (truth[i] - est[j]).abs() <= cutoff).collect()
}

/// GOSPA with `alpha = 2`, `p = 1` and absolute DOA errors.
pub fn gospa(truth: &[f64], est: &[f64], cfg: &MetricConfig) -> GospaBreakdown {
    let pairs = matched_pairs(truth, est, cfg.c, |d| d);
    let dist = pairs.iter().fold(0.0, |acc, &(i, j)| acc + (truth[i] - est[j]).abs());
    let half = cfg.c / 2.0;
    let miss = half * (truth.len() - pairs.len()) as f64;
    let false_ = half * (est.len() - pairs.len()) as f64;
    GospaBreakdown { total: dist + miss + false_, dist, miss, false_ }
}

/// Cutoff RMSE normalized by the number of true DOAs.
pub fn rmse(truth: &[f64], est: &[f64], cfg: &MetricConfig) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::Domain("RMSE needs at least one true DOA"));
    }
    let pairs = matched_pairs(truth, est, cfg.c_prime, |d| d * d);
    let sq: f64 = pairs.iter().map(|&(i, j)| (truth[i] - est[j]).powi(2)).sum();
    let missed = (truth.len() - pairs.len()) as f64 * cfg.c_prime * cfg.c_prime;
    Ok(((sq + missed) / truth.len() as f64).sqrt())
}

/// Scores of one time step. `rmse` is `None` when no source is present.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepMetrics {
    pub gospa: GospaBreakdown,
    pub rmse: Option<f64>,
}

pub fn score_step(truth: &[f64], est: &[f64], cfg: &MetricConfig) -> StepMetrics {
    StepMetrics { gospa: gospa(truth, est, cfg), rmse: rmse(truth, est, cfg).ok() }
}

/// Field-wise means; the RMSE mean skips steps without sources.
pub fn average_metrics(steps: &[StepMetrics]) -> Result<StepMetrics> {
    if steps.is_empty() {
        return Err(Error::Domain("nothing to average"));
    }
    let n = steps.len() as f64;
    let mean = |f: fn(&GospaBreakdown) -> f64| steps.iter().map(|s| f(&s.gospa)).sum::<f64>() / n;
    let gospa = GospaBreakdown {
        total: mean(|g| g.total),
        dist: mean(|g| g.dist),
        miss: mean(|g| g.miss),
        false_: mean(|g| g.false_),
    };
    let defined: Vec<f64> = steps.iter().filter_map(|s| s.rmse).collect();
    let rmse = (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);
    Ok(StepMetrics { gospa, rmse })
}
