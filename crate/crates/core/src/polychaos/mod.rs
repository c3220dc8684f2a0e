//! Legendre polynomial chaos expansions.
//!
//! Inputs are uniform on `[-1, 1]`, so the chaos basis is built from
//! classical (unnormalised) Legendre polynomials with squared norms
//! `E[P_k(Z)^2] = 1/(2k+1)` tracked explicitly. Coefficients are fitted
//! either by least squares on an arbitrary design (point collocation) or by
//! spectral projection on a tensor Gauss-Legendre grid.

mod basis;
mod fit;
mod model_file;

pub use basis::{
    basis_matrix, build_basis, build_basis_with_cap, legendre_all, legendre_eval, norm_squared,
    MultiIndex, PceBasis, TruncationScheme, DEFAULT_BASIS_CAP,
};
pub use fit::{fit_projection, fit_regression, FitDiagnostics, FitMethod, PceModel};
pub use model_file::PceModelFile;

/// Condition number above which a regression fit carries a warning.
pub const ILL_CONDITIONED: f64 = 1e12;
