use rand::Rng;
use rayon::prelude::*;

use super::dataset::Dataset;
use super::{Interval, TestResult};
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub seed: u64,
    /// Coverage of the percentile interval.
    pub level: f64,
}

impl BootstrapConfig {
    pub fn new(replicates: usize, seed: u64) -> Self {
        BootstrapConfig { replicates, seed, level: 0.95 }
    }
}

/// Linear-interpolation quantile of sorted data (type 7).
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Row-resampling bootstrap of the excess-risk statistic.
///
/// Replicate `b` draws from its own seeded stream, so the result does not
/// depend on how rayon schedules the work. The standard error is the
/// replicate standard deviation; the interval is the percentile interval.
pub fn bootstrap_test<F>(data: &Dataset, estimator: F, cfg: BootstrapConfig) -> Result<TestResult>
where
    F: Fn(&Dataset) -> Result<f64> + Sync,
{
    if cfg.replicates < 100 {
        return Err(Error::Usage(format!("bootstrap needs at least 100 resamples, got {}", cfg.replicates)));
    }
    if !(0.0 < cfg.level && cfg.level < 1.0) {
        return Err(Error::Usage(format!("interval level {} outside (0, 1)", cfg.level)));
    }
    let n = data.n_rows();
    if n == 0 {
        return Err(Error::Usage("cannot bootstrap an empty dataset".into()));
    }
    let statistic = estimator(data)?;
    let draws: Vec<Option<f64>> = (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(cfg.seed, Stream::Bootstrap, b);
            let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            estimator(&data.take(&rows)).ok().filter(|s| s.is_finite())
        })
        .collect();
    let mut ok: Vec<f64> = draws.into_iter().flatten().collect();
    let failed = cfg.replicates - ok.len();
    if failed * 10 > cfg.replicates {
        return Err(Error::Bootstrap(format!("estimator failed on {failed} of {} resamples", cfg.replicates)));
    }
    ok.sort_by(f64::total_cmp);
    let mean = ok.iter().sum::<f64>() / ok.len() as f64;
    let var = ok.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (ok.len() - 1).max(1) as f64;
    let tail = (1.0 - cfg.level) / 2.0;
    let interval = Interval { level: cfg.level, lower: percentile(&ok, tail), upper: percentile(&ok, 1.0 - tail) };
    let mut result = TestResult::one_sided("bootstrap", None, statistic, var.sqrt());
    result.interval = Some(interval);
    result.notes.push(format!("{} resamples, seed {}, {failed} failed", cfg.replicates, cfg.seed));
    Ok(result)
}
