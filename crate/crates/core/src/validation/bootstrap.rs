use rand::Rng;
use serde::{Deserialize, Serialize};

use super::metrics::percentile_sorted;
use crate::error::{Error, Result};
use crate::seeds;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntervalMethod {
    Bootstrap,
    PosteriorResampling,
    None,
}

/// A point estimate with an optional interval. Percentile intervals need
/// not contain the point estimate; only `lo <= hi` is guaranteed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalEstimate {
    pub point: f64,
    pub lo: f64,
    pub hi: f64,
    pub method: IntervalMethod,
    /// Average of the statistic over resamples, when resampling was used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resample_mean: Option<f64>,
}

impl IntervalEstimate {
    pub fn point_only(point: f64) -> Self {
        Self {
            point,
            lo: point,
            hi: point,
            method: IntervalMethod::None,
            resample_mean: None,
        }
    }

    /// Percentile interval of `replicates` at the given coverage `level`.
    pub fn from_replicates(point: f64, mut replicates: Vec<f64>, level: f64, method: IntervalMethod) -> Self {
        replicates.sort_by(f64::total_cmp);
        let tail = 0.5 * (1.0 - level);
        let mean = replicates.iter().sum::<f64>() / replicates.len() as f64;
        Self {
            point,
            lo: percentile_sorted(&replicates, tail),
            hi: percentile_sorted(&replicates, 1.0 - tail),
            method,
            resample_mean: Some(mean),
        }
    }
}

/// Bootstrap percentile interval for `statistic` over `replicates`
/// resamples drawn with replacement.
pub fn bootstrap_ci(
    values: &[f64],
    statistic: impl Fn(&[f64]) -> f64,
    replicates: usize,
    level: f64,
    seed: u64,
) -> Result<IntervalEstimate> {
    if replicates < 100 {
        return Err(Error::InvalidInput(format!(
            "bootstrap needs at least 100 replicates, got {replicates}"
        )));
    }
    if values.is_empty() {
        return Err(Error::InvalidInput("bootstrap of an empty sample".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidInput(format!("coverage level {level} outside (0, 1)")));
    }
    let m = values.len();
    let mut rng = seeds::rng(seed);
    let mut resample = vec![0.0; m];
    let stats: Vec<f64> = (0..replicates)
        .map(|_| {
            for slot in resample.iter_mut() {
                *slot = values[rng.random_range(0..m)];
            }
            statistic(&resample)
        })
        .collect();
    Ok(IntervalEstimate::from_replicates(
        statistic(values),
        stats,
        level,
        IntervalMethod::Bootstrap,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validation::metrics::empirical_mean;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn constant_data_degenerate_interval() {
        let ci = bootstrap_ci(&[2.0; 40], empirical_mean, 200, 0.95, 1).unwrap();
        assert_eq!((ci.point, ci.lo, ci.hi), (2.0, 2.0, 2.0));
    }

    #[test]
    fn clt_width() {
        let mut rng = crate::seeds::rng(10);
        let v: Vec<f64> = (0..1000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let ci = bootstrap_ci(&v, empirical_mean, 1000, 0.95, 3).unwrap();
        let expect = 2.0 * 1.96 / 1000f64.sqrt();
        let width = ci.hi - ci.lo;
        assert!((width - expect).abs() <= 0.3 * expect, "{width} vs {expect}");
    }

    #[test]
    fn reproducible_and_ordered() {
        let v: Vec<f64> = (0..50).map(|i| ((i * 37) % 11) as f64).collect();
        let a = bootstrap_ci(&v, empirical_mean, 500, 0.95, 9).unwrap();
        let b = bootstrap_ci(&v, empirical_mean, 500, 0.95, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.lo <= a.hi);
        assert!(bootstrap_ci(&v, empirical_mean, 99, 0.95, 9).is_err());
    }
}
