//! Marginal likelihood of the correlation lengths with the mean
//! coefficients and process variance integrated out under the prior
//! `p(beta, lambda^2) ∝ 1 / lambda^2`:
//!
//! ```text
//! log L(delta) = -(m - q)/2 log(lambda_hat^2) - 1/2 log|A| - 1/2 log|H' A^-1 H|
//! ```
//!
//! Additive constants are dropped. Determinants come from Cholesky factor
//! diagonals.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::kernel::{Kernel, KernelFamily};
use super::mean_basis::MeanBasis;
use crate::designs::Design;
use crate::error::{Error, Result};
use crate::linalg::{cholesky_fixed, cholesky_with_jitter, log_det, JITTER_MAX};

/// Floor for `lambda_hat^2` inside the logarithm; an exactly interpolated
/// response would otherwise give `-inf`.
const LAMBDA_SQ_FLOOR: f64 = 1e-300;

/// Everything derived from one factorisation of the correlation matrix.
pub(crate) struct Factorization {
    pub chol: Cholesky<f64, Dyn>,
    pub jitter: f64,
    /// `A^-1 H`.
    pub ainv_h: DMatrix<f64>,
    /// `(H' A^-1 H)^-1`.
    pub g_inv: DMatrix<f64>,
    pub beta: DVector<f64>,
    /// `A^-1 (Y - H beta_hat)`.
    pub alpha: DVector<f64>,
    pub lambda_sq: f64,
    pub log_lik: f64,
}

pub(crate) fn correlation_matrix(design: &Design, kernel: &Kernel) -> DMatrix<f64> {
    let m = design.len();
    let mut a = DMatrix::identity(m, m);
    for i in 0..m {
        for k in 0..i {
            let c = kernel.eval(design.row(i), design.row(k));
            a[(i, k)] = c;
            a[(k, i)] = c;
        }
    }
    a
}

fn check_problem(design: &Design, y: &[f64], basis: &MeanBasis) -> Result<()> {
    if y.len() != design.len() {
        return Err(Error::LengthMismatch {
            left: design.len(),
            right: y.len(),
        });
    }
    if basis.dim() != design.dim() {
        return Err(Error::DimensionMismatch {
            expected: design.dim(),
            got: basis.dim(),
        });
    }
    if design.len() <= basis.len() {
        return Err(Error::InvalidInput(format!(
            "{} design points for {} mean terms; need m > q",
            design.len(),
            basis.len()
        )));
    }
    Ok(())
}

/// Factorise at `kernel`, either with adaptive jitter or with a fixed one.
pub(crate) fn factorize(
    design: &Design,
    y: &[f64],
    basis: &MeanBasis,
    kernel: &Kernel,
    fixed_jitter: Option<f64>,
) -> Result<Factorization> {
    check_problem(design, y, basis)?;
    let a = correlation_matrix(design, kernel);
    let not_pd = || Error::NotPositiveDefinite {
        lengths: kernel.lengths().to_vec(),
        jitter: fixed_jitter.unwrap_or(JITTER_MAX),
    };
    let (chol, jitter) = match fixed_jitter {
        Some(j) => (cholesky_fixed(&a, j).ok_or_else(not_pd)?, j),
        None => cholesky_with_jitter(&a).ok_or_else(not_pd)?,
    };
    let m = design.len();
    let q = basis.len();
    let h = basis.matrix(design);
    let yv = DVector::from_column_slice(y);

    let ainv_h = chol.solve(&h);
    let g = h.transpose() * &ainv_h;
    let g_chol = Cholesky::new(g.clone()).ok_or_else(|| {
        Error::Fit("mean basis is collinear on this design (H' A^-1 H is singular)".into())
    })?;
    let g_inv = g_chol.inverse();
    let beta = &g_inv * (ainv_h.transpose() * &yv);
    let resid = &yv - &h * &beta;
    let alpha = chol.solve(&resid);
    let lambda_sq = resid.dot(&alpha).max(0.0);

    let log_lik = -0.5 * (m - q) as f64 * lambda_sq.max(LAMBDA_SQ_FLOOR).ln()
        - 0.5 * log_det(&chol)
        - 0.5 * log_det(&g_chol);
    if !log_lik.is_finite() {
        return Err(Error::Fit(format!(
            "non-finite log-likelihood at lengths {:?}",
            kernel.lengths()
        )));
    }
    Ok(Factorization {
        chol,
        jitter,
        ainv_h,
        g_inv,
        beta,
        alpha,
        lambda_sq,
        log_lik,
    })
}

/// Log marginal likelihood at correlation lengths `lengths`.
pub fn log_marginal_likelihood(
    lengths: &[f64],
    design: &Design,
    y: &[f64],
    basis: &MeanBasis,
    family: KernelFamily,
) -> Result<f64> {
    let kernel = Kernel::new(family, lengths.to_vec())?;
    Ok(factorize(design, y, basis, &kernel, None)?.log_lik)
}

/// Log marginal likelihood and its gradient with respect to `log(lengths)`.
///
/// With `P = A^-1 - A^-1 H (H' A^-1 H)^-1 H' A^-1` and `alpha = P Y`,
/// `d log L / d theta_j = (m - q) alpha' A_j alpha / (2 lambda_hat^2) - tr(P A_j) / 2`,
/// where `A_j` is the elementwise derivative of the correlation matrix.
pub fn log_marginal_likelihood_with_gradient(
    lengths: &[f64],
    design: &Design,
    y: &[f64],
    basis: &MeanBasis,
    family: KernelFamily,
) -> Result<(f64, Vec<f64>)> {
    let kernel = Kernel::new(family, lengths.to_vec())?;
    let f = factorize(design, y, basis, &kernel, None)?;
    let grad = gradient(&f, design, basis, &kernel);
    Ok((f.log_lik, grad))
}

pub(crate) fn gradient(
    f: &Factorization,
    design: &Design,
    basis: &MeanBasis,
    kernel: &Kernel,
) -> Vec<f64> {
    let m = design.len();
    let n = design.dim();
    let q = basis.len();
    let ainv = f.chol.inverse();
    let p = &ainv - &f.ainv_h * &f.g_inv * f.ainv_h.transpose();

    let mut quad = vec![0.0; n];
    let mut trace = vec![0.0; n];
    let mut dc = vec![0.0; n];
    for i in 0..m {
        for k in 0..i {
            kernel.eval_with_log_grad(design.row(i), design.row(k), &mut dc);
            let aa = 2.0 * f.alpha[i] * f.alpha[k];
            let pp = 2.0 * p[(i, k)];
            for j in 0..n {
                quad[j] += aa * dc[j];
                trace[j] += pp * dc[j];
            }
        }
    }
    let lam = f.lambda_sq.max(LAMBDA_SQ_FLOOR);
    (0..n)
        .map(|j| 0.5 * (m - q) as f64 * quad[j] / lam - 0.5 * trace[j])
        .collect()
}
