use crate::error::{Error, Result};

/// Root mean square difference.
pub fn rmse(preds: &[f64], truths: &[f64]) -> Result<f64> {
    if preds.len() != truths.len() {
        return Err(Error::LengthMismatch {
            left: preds.len(),
            right: truths.len(),
        });
    }
    if preds.is_empty() {
        return Err(Error::InvalidInput("RMSE of an empty sample".into()));
    }
    let ss: f64 = preds.iter().zip(truths).map(|(p, t)| (p - t).powi(2)).sum();
    Ok((ss / preds.len() as f64).sqrt())
}

pub fn empirical_mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population standard deviation (divides by the sample size).
pub fn empirical_sd(values: &[f64]) -> f64 {
    let mean = empirical_mean(values);
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (ss / values.len() as f64).sqrt()
}

/// Fraction of `preds` at or above `mu + kappa * sigma`.
pub fn exceedance(preds: &[f64], mu: f64, sigma: f64, kappa: f64) -> f64 {
    if preds.is_empty() {
        return 0.0;
    }
    let threshold = mu + kappa * sigma;
    preds.iter().filter(|&&p| p >= threshold).count() as f64 / preds.len() as f64
}

/// Percentile of already sorted data by linear interpolation between order
/// statistics (position `(len - 1) * q`).
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of an empty sample");
    let pos = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

pub fn percentile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    percentile_sorted(&v, q)
}
