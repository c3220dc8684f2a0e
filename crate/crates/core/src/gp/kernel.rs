use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SQRT5: f64 = 2.236_067_977_499_79;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelFamily {
    SquaredExponential,
    Matern52,
}

impl KernelFamily {
    pub fn short_name(self) -> &'static str {
        match self {
            KernelFamily::SquaredExponential => "se",
            KernelFamily::Matern52 => "matern",
        }
    }
}

/// Separable stationary correlation function with one length per input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub family: KernelFamily,
    lengths: Vec<f64>,
}

impl Kernel {
    pub fn new(family: KernelFamily, lengths: Vec<f64>) -> Result<Self> {
        if lengths.is_empty() || lengths.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
            return Err(Error::InvalidInput(format!(
                "correlation lengths must be positive and finite, got {lengths:?}"
            )));
        }
        Ok(Self { family, lengths })
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn dim(&self) -> usize {
        self.lengths.len()
    }

    /// Correlation between two points.
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.family {
            KernelFamily::SquaredExponential => {
                let s: f64 = a
                    .iter()
                    .zip(b)
                    .zip(&self.lengths)
                    .map(|((x, y), d)| ((x - y) / d).powi(2))
                    .sum();
                (-0.5 * s).exp()
            }
            KernelFamily::Matern52 => {
                let mut prod = 1.0;
                let mut sum = 0.0;
                for ((x, y), d) in a.iter().zip(b).zip(&self.lengths) {
                    let r = (x - y).abs() / d;
                    prod *= 1.0 + SQRT5 * r + 5.0 * r * r / 3.0;
                    sum += r;
                }
                prod * (-SQRT5 * sum).exp()
            }
        }
    }

    /// Correlation and its gradient with respect to `log(length_j)`.
    pub fn eval_with_log_grad(&self, a: &[f64], b: &[f64], grad: &mut [f64]) -> f64 {
        let c = self.eval(a, b);
        for (((g, x), y), d) in grad.iter_mut().zip(a).zip(b).zip(&self.lengths) {
            let r = (x - y).abs() / d;
            *g = match self.family {
                KernelFamily::SquaredExponential => c * r * r,
                KernelFamily::Matern52 => {
                    let poly = 1.0 + SQRT5 * r + 5.0 * r * r / 3.0;
                    c * (5.0 / 3.0) * r * r * (1.0 + SQRT5 * r) / poly
                }
            };
        }
        c
    }
}
