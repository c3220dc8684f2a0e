//! Gaussian process emulation.
//!
//! The prior mean is linear in a small set of regression functions chosen by
//! stepwise selection, the correlation function is squared exponential or
//! Matérn-5/2, and the mean coefficients and process variance are
//! integrated out analytically. Correlation lengths are plug-in maximum
//! likelihood estimates, and the resulting posterior is Student-t with
//! `m - q` degrees of freedom.

mod kernel;
mod likelihood;
mod mean_basis;
mod model;
pub mod optimize;

pub use kernel::{Kernel, KernelFamily};
pub use likelihood::{log_marginal_likelihood, log_marginal_likelihood_with_gradient};
pub use mean_basis::{stepwise_mean_basis, MeanBasis};
pub use model::{fit, GpFitConfig, GpModel, GpModelFile, PosteriorPrediction, DEFAULT_SAMPLE_CAP};
