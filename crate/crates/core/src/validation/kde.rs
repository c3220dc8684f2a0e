use super::metrics::{empirical_mean, percentile};
use crate::error::{Error, Result};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Kernel contributions beyond this many bandwidths are below 1e-14 and
/// are skipped.
const KERNEL_REACH: f64 = 8.0;

/// Silverman's rule of thumb, `0.9 min(s, IQR / 1.34) m^(-1/5)`.
///
/// `s` is the sample standard deviation (divisor `m - 1`). When the IQR is
/// zero but the data still spread, `s` alone is used.
pub fn silverman_bandwidth(values: &[f64]) -> Result<f64> {
    let m = values.len();
    if m < 2 {
        return Err(Error::Degenerate(format!("bandwidth needs at least 2 values, got {m}")));
    }
    let mean = empirical_mean(values);
    let s = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1) as f64).sqrt();
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Degenerate("values have zero spread; bandwidth undefined".into()));
    }
    let iqr = percentile(values, 0.75) - percentile(values, 0.25);
    let spread = if iqr > 0.0 { s.min(iqr / 1.34) } else { s };
    Ok(0.9 * spread * (m as f64).powf(-0.2))
}

/// `points` equally spaced values covering `[lo, hi]`.
pub fn linear_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2, "a grid needs at least two points");
    let step = (hi - lo) / (points - 1) as f64;
    (0..points)
        .map(|i| if i + 1 == points { hi } else { lo + step * i as f64 })
        .collect()
}

/// Grid spanning every sample in `sets` padded by five bandwidths.
pub fn kde_grid(sets: &[&[f64]], bandwidth: f64, points: usize) -> Vec<f64> {
    let (lo, hi) = sets
        .iter()
        .flat_map(|s| s.iter())
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    linear_grid(lo - 5.0 * bandwidth, hi + 5.0 * bandwidth, points)
}

/// Gaussian kernel density estimate of `values` at each grid point.
pub fn kde(values: &[f64], bandwidth: f64, grid: &[f64]) -> Result<Vec<f64>> {
    if !(bandwidth > 0.0) {
        return Err(Error::InvalidInput(format!("bandwidth must be positive, got {bandwidth}")));
    }
    if grid.is_empty() || grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput("KDE grid must be non-empty and ascending".into()));
    }
    if values.is_empty() {
        return Err(Error::InvalidInput("KDE of an empty sample".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let reach = KERNEL_REACH * bandwidth;
    let norm = INV_SQRT_2PI / (values.len() as f64 * bandwidth);
    let mut start = 0;
    Ok(grid
        .iter()
        .map(|&g| {
            while start < sorted.len() && sorted[start] < g - reach {
                start += 1;
            }
            let sum: f64 = sorted[start..]
                .iter()
                .take_while(|&&v| v <= g + reach)
                .map(|&v| {
                    let u = (g - v) / bandwidth;
                    (-0.5 * u * u).exp()
                })
                .sum();
            norm * sum
        })
        .collect())
}

/// Approximate KDE on an equally spaced grid by linear binning followed by
/// a discrete convolution. Used for the many per-sample curves behind
/// posterior bands; values outside the grid are dropped.
pub(crate) struct BinnedKde {
    lo: f64,
    step: f64,
    kernel: Vec<f64>,
    points: usize,
}

impl BinnedKde {
    pub fn new(grid: &[f64], bandwidth: f64) -> Self {
        let points = grid.len();
        let lo = grid[0];
        let step = (grid[points - 1] - lo) / (points - 1) as f64;
        let reach = ((KERNEL_REACH * bandwidth / step).ceil() as usize).min(points);
        let kernel = (0..=reach)
            .map(|k| {
                let u = k as f64 * step / bandwidth;
                INV_SQRT_2PI / bandwidth * (-0.5 * u * u).exp()
            })
            .collect();
        Self { lo, step, kernel, points }
    }

    pub fn eval(&self, values: &[f64], out: &mut [f64]) {
        let mut counts = vec![0.0; self.points];
        for &v in values {
            let pos = (v - self.lo) / self.step;
            if !(pos >= 0.0) || pos > (self.points - 1) as f64 {
                continue;
            }
            let i = (pos.floor() as usize).min(self.points - 2);
            let frac = pos - i as f64;
            counts[i] += 1.0 - frac;
            counts[i + 1] += frac;
        }
        let inv_m = 1.0 / values.len() as f64;
        let reach = self.kernel.len() - 1;
        for (g, slot) in out.iter_mut().enumerate() {
            let a = g.saturating_sub(reach);
            let b = (g + reach).min(self.points - 1);
            let mut sum = 0.0;
            for (i, c) in counts.iter().enumerate().take(b + 1).skip(a) {
                if *c != 0.0 {
                    sum += c * self.kernel[g.abs_diff(i)];
                }
            }
            *slot = sum * inv_m;
        }
    }
}

/// Trapezoid rule over a possibly uneven grid.
pub fn trapezoid(grid: &[f64], density: &[f64]) -> f64 {
    grid.windows(2)
        .zip(density.windows(2))
        .map(|(g, d)| 0.5 * (g[1] - g[0]) * (d[0] + d[1]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, StandardNormal};

    fn normals(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = crate::seeds::rng(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn bandwidth_standard_normal() {
        let h = silverman_bandwidth(&normals(1000, 4)).unwrap();
        let expect = 0.9 * 1000f64.powf(-0.2);
        assert!((h - expect).abs() < 0.15 * expect, "{h}");
    }

    #[test]
    fn bandwidth_scale_equivariant() {
        let v = normals(200, 5);
        let h = silverman_bandwidth(&v).unwrap();
        let scaled: Vec<f64> = v.iter().map(|x| 3.5 * x).collect();
        assert!((silverman_bandwidth(&scaled).unwrap() - 3.5 * h).abs() < 1e-12);
        assert!(silverman_bandwidth(&[1.0, 1.0, 1.0]).is_err());
        assert!(silverman_bandwidth(&[1.0]).is_err());
        // IQR zero, spread nonzero.
        assert!(silverman_bandwidth(&[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]).unwrap() > 0.0);
    }

    #[test]
    fn single_value_curve() {
        let h = 0.3;
        let grid = linear_grid(-2.0, 2.0, 41);
        let f = kde(&[0.5], h, &grid).unwrap();
        for (g, d) in grid.iter().zip(&f) {
            let u: f64 = (g - 0.5) / h;
            let expect = INV_SQRT_2PI * (-0.5 * u * u).exp() / h;
            assert!((d - expect).abs() <= 1e-14 * expect + 1e-13);
        }
        let peak = f.iter().cloned().fold(0.0, f64::max);
        assert_eq!(peak, f[25]);
    }

    #[test]
    fn integrates_to_one_and_symmetric() {
        let mut v = normals(500, 8);
        v.extend(v.clone().iter().map(|x| -x));
        let h = silverman_bandwidth(&v).unwrap();
        let grid = kde_grid(&[&v], h, 512);
        let f = kde(&v, h, &grid).unwrap();
        assert!((trapezoid(&grid, &f) - 1.0).abs() < 1e-2);
        for i in 0..256 {
            assert!((f[i] - f[511 - i]).abs() < 1e-9 * f[i].max(1e-300) + 1e-14);
        }
    }

    #[test]
    fn binned_close_to_exact() {
        let v = normals(1000, 12);
        let h = silverman_bandwidth(&v).unwrap();
        let grid = kde_grid(&[&v], h, 512);
        let exact = kde(&v, h, &grid).unwrap();
        let mut binned = vec![0.0; 512];
        BinnedKde::new(&grid, h).eval(&v, &mut binned);
        let peak = exact.iter().cloned().fold(0.0, f64::max);
        for (a, b) in exact.iter().zip(&binned) {
            assert!((a - b).abs() < 1e-2 * peak, "{a} {b}");
        }
        assert!((trapezoid(&grid, &binned) - 1.0).abs() < 1e-2);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(kde(&[1.0], 0.0, &[0.0, 1.0]).is_err());
        assert!(kde(&[1.0], 0.1, &[1.0, 0.0]).is_err());
        assert!(kde(&[1.0], 0.1, &[]).is_err());
    }
}
