//! Error summaries: mean, percentiles and the empirical CDF.

use crate::error::{Error, Result};

/// Number of points on which [`ErrorStats::cdf`] is sampled.
pub const CDF_POINTS: usize = 200;

/// Summary of per-trial positioning errors (meters).
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorStats {
    pub errors: Vec<f64>,
    pub mean: f64,
    pub p50: f64,
    pub p90: f64,
    pub p95: f64,
    /// `(e, P(E ≤ e))` on an even grid from 0 to the largest error.
    pub cdf: Vec<(f64, f64)>,
}

impl ErrorStats {
    pub fn new(errors: Vec<f64>) -> Result<Self> {
        if errors.is_empty() {
            return Err(Error::InvalidParameter("no trials to summarize".into()));
        }
        if let Some(e) = errors.iter().find(|e| !(e.is_finite() && **e >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "invalid error distance {e}"
            )));
        }
        let mut sorted = errors.clone();
        sorted.sort_by(f64::total_cmp);
        let mean = errors.iter().sum::<f64>() / errors.len() as f64;
        let max = *sorted.last().unwrap();
        let cdf = cdf_sorted(&sorted, &even_grid(max, CDF_POINTS));
        Ok(Self {
            mean,
            p50: percentile_sorted(&sorted, 50.0),
            p90: percentile_sorted(&sorted, 90.0),
            p95: percentile_sorted(&sorted, 95.0),
            cdf,
            errors,
        })
    }

    pub fn max(&self) -> f64 {
        self.errors.iter().copied().fold(0.0, f64::max)
    }
}

/// `n` evenly spaced points from 0 to `max` inclusive.
pub fn even_grid(max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![max],
        _ => (0..n)
            .map(|i| {
                if i + 1 == n {
                    max
                } else {
                    max * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// Right-continuous empirical CDF `P(E ≤ e)` at each grid point.
pub fn cdf(errors: &[f64], grid: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted = errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    cdf_sorted(&sorted, grid)
}

fn cdf_sorted(sorted: &[f64], grid: &[f64]) -> Vec<(f64, f64)> {
    let n = sorted.len() as f64;
    grid.iter()
        .map(|&e| (e, sorted.partition_point(|x| *x <= e) as f64 / n))
        .collect()
}

/// Linear interpolation between order statistics.
pub fn percentile(values: &[f64], pct: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    percentile_sorted(&sorted, pct)
}

fn percentile_sorted(sorted: &[f64], pct: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = (pct / 100.0).clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}
