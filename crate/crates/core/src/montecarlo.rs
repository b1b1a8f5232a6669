//! Trial scheduling and summary statistics.
//!
//! Trials are keyed by index and collected in index order, so every
//! aggregate is a fold over the same sequence regardless of worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Run `trial(i)` for `i in 0..trials` on `workers` threads (0 = rayon
/// default) and return the results in index order.
pub fn run_trials<T, F>(trials: u64, workers: usize, trial: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| invalid("workers", e.to_string()))?;
    pool.install(|| (0..trials).into_par_iter().map(&trial).collect())
}

/// Wilson score interval for a binomial proportion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilsonInterval {
    pub lower: f64,
    pub upper: f64,
}

pub fn wilson(successes: u64, trials: u64) -> WilsonInterval {
    if trials == 0 {
        return WilsonInterval { lower: 0.0, upper: 1.0 };
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z_95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    WilsonInterval {
        lower: if successes == 0 { 0.0 } else { (center - half).max(0.0) },
        upper: if successes >= trials { 1.0 } else { (center + half).min(1.0) },
    }
}

/// Mean, sample standard deviation and standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_dev: f64,
    pub std_err: f64,
    pub n: usize,
}

pub fn mean_estimate(values: &[f64]) -> MeanEstimate {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    MeanEstimate {
        mean,
        std_dev: var.sqrt(),
        std_err: (var / n as f64).sqrt(),
        n,
    }
}
