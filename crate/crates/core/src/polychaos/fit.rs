use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::basis::{basis_matrix, PceBasis, TruncationScheme};
use super::ILL_CONDITIONED;
use crate::designs::Design;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMethod {
    Regression,
    SpectralProjection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    /// Ratio of extreme singular values of the basis matrix (regression only).
    pub condition_estimate: Option<f64>,
    /// Euclidean norm of the training residuals.
    pub residual_norm: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// A fitted expansion `sum_alpha a_alpha psi_alpha(z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PceModel {
    basis: PceBasis,
    coefficients: Vec<f64>,
    fit_method: FitMethod,
    diagnostics: FitDiagnostics,
}

impl PceModel {
    pub fn from_coefficients(
        basis: PceBasis,
        coefficients: Vec<f64>,
        fit_method: FitMethod,
        diagnostics: FitDiagnostics,
    ) -> Result<Self> {
        if coefficients.len() != basis.len() {
            return Err(Error::LengthMismatch {
                left: basis.len(),
                right: coefficients.len(),
            });
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::Fit("non-finite expansion coefficient".into()));
        }
        Ok(Self {
            basis,
            coefficients,
            fit_method,
            diagnostics,
        })
    }

    pub fn basis(&self) -> &PceBasis {
        &self.basis
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn fit_method(&self) -> FitMethod {
        self.fit_method
    }

    pub fn diagnostics(&self) -> &FitDiagnostics {
        &self.diagnostics
    }

    pub fn predict(&self, z: &[f64]) -> f64 {
        self.basis
            .eval(z)
            .iter()
            .zip(&self.coefficients)
            .map(|(psi, a)| psi * a)
            .sum()
    }

    /// Predictions at every design point.
    pub fn predict_design(&self, design: &Design) -> Result<Vec<f64>> {
        if design.dim() != self.basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.basis.dim(),
                got: design.dim(),
            });
        }
        let mut table = Vec::new();
        let mut row = vec![0.0; self.basis.len()];
        Ok(design
            .rows()
            .map(|z| {
                self.basis.eval_into(z, &mut table, &mut row);
                row.iter().zip(&self.coefficients).map(|(p, a)| p * a).sum()
            })
            .collect())
    }

    /// Mean `a_0` and variance `sum_{alpha != 0} a_alpha^2 gamma_alpha^2`.
    pub fn analytic_moments(&self) -> (f64, f64) {
        let mut mean = 0.0;
        let mut var = 0.0;
        for ((alpha, a), g2) in self
            .basis
            .indices()
            .iter()
            .zip(&self.coefficients)
            .zip(self.basis.norms_sq())
        {
            if alpha.is_zero() {
                mean = *a;
            } else {
                var += a * a * g2;
            }
        }
        (mean, var)
    }
}

fn check_outputs(design: &Design, y: &[f64]) -> Result<()> {
    if y.len() != design.len() {
        return Err(Error::LengthMismatch {
            left: design.len(),
            right: y.len(),
        });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("simulator outputs must be finite".into()));
    }
    Ok(())
}

/// Least-squares (point collocation) fit with a total-order basis.
///
/// Solved through a Householder QR factorisation of the basis matrix. An
/// ill-conditioned but solvable system is fitted anyway and flagged in the
/// diagnostics.
pub fn fit_regression(design: &Design, y: &[f64], basis: &PceBasis) -> Result<PceModel> {
    if !matches!(basis.scheme(), TruncationScheme::TotalOrder(_)) {
        return Err(Error::Config(
            "regression fits use a total-order basis".into(),
        ));
    }
    check_outputs(design, y)?;
    let (m, big_n) = (design.len(), basis.len());
    if m < big_n {
        return Err(Error::UnderDetermined {
            points: m,
            terms: big_n,
        });
    }
    let psi = basis_matrix(design, basis)?;
    let rhs = DVector::from_column_slice(y);

    let sv = psi.singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };

    let qr = psi.clone().qr();
    let qty = qr.q().transpose() * &rhs;
    let coef = qr
        .r()
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::Fit("basis matrix is exactly rank deficient".into()))?;

    let residual = (&psi * &coef - &rhs).norm();
    let mut diagnostics = FitDiagnostics {
        condition_estimate: Some(cond),
        residual_norm: residual,
        warnings: Vec::new(),
    };
    if !(cond <= ILL_CONDITIONED) {
        let msg = format!("basis matrix is ill-conditioned (condition estimate {cond:.3e})");
        log::warn!("{msg}");
        diagnostics.warnings.push(msg);
    }
    PceModel::from_coefficients(
        basis.clone(),
        coef.iter().copied().collect(),
        FitMethod::Regression,
        diagnostics,
    )
}

/// Spectral projection on a tensor Gauss-Legendre grid:
/// `a_alpha = sum_i w_i y_i psi_alpha(x_i) / gamma_alpha^2`.
///
/// Every dimension needs at least `p + 1` nodes, otherwise degree-`p`
/// coefficients alias onto lower ones.
pub fn fit_projection(design: &Design, y: &[f64], basis: &PceBasis) -> Result<PceModel> {
    let p = match basis.scheme() {
        TruncationScheme::TensorProduct(p) => p as usize,
        TruncationScheme::TotalOrder(_) => {
            return Err(Error::Config(
                "spectral projection uses a tensor-product basis".into(),
            ))
        }
    };
    let weights = design
        .weights()
        .ok_or_else(|| Error::WrongDesign("spectral projection needs quadrature weights".into()))?;
    let orders = design
        .grid_orders()
        .ok_or_else(|| Error::WrongDesign("spectral projection needs a tensor grid".into()))?;
    if design.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            got: design.dim(),
        });
    }
    check_outputs(design, y)?;
    for (dim, &k) in orders.iter().enumerate() {
        if k < p + 1 {
            return Err(Error::Aliasing {
                dim,
                nodes: k,
                order: p,
                needed: p + 1,
            });
        }
    }

    let mut coef = vec![0.0; basis.len()];
    let mut table = Vec::new();
    let mut row = vec![0.0; basis.len()];
    for ((z, &w), &yi) in design.rows().zip(weights).zip(y) {
        basis.eval_into(z, &mut table, &mut row);
        for (c, psi) in coef.iter_mut().zip(&row) {
            *c += w * yi * psi;
        }
    }
    for (c, g2) in coef.iter_mut().zip(basis.norms_sq()) {
        *c /= g2;
    }

    let model = PceModel::from_coefficients(
        basis.clone(),
        coef,
        FitMethod::SpectralProjection,
        FitDiagnostics::default(),
    )?;
    let preds = model.predict_design(design)?;
    let residual = preds
        .iter()
        .zip(y)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(PceModel {
        diagnostics: FitDiagnostics {
            condition_estimate: None,
            residual_norm: residual,
            warnings: Vec::new(),
        },
        ..model
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designs::{sobol, tensor_grid};
    use crate::polychaos::build_basis;
    use rand::Rng;

    fn synth(design: &Design, basis: &PceBasis, coef: &[f64]) -> Vec<f64> {
        let psi = basis_matrix(design, basis).unwrap();
        (&psi * DVector::from_column_slice(coef)).iter().copied().collect()
    }

    #[test]
    fn regression_recovers_coefficients() {
        let basis = build_basis(3, TruncationScheme::TotalOrder(3)).unwrap();
        let mut rng = crate::seeds::rng(3);
        let truth: Vec<f64> = (0..basis.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let d = sobol(2 * basis.len(), 3, 17).unwrap();
        let y = synth(&d, &basis, &truth);
        let model = fit_regression(&d, &y, &basis).unwrap();
        for (a, b) in model.coefficients().iter().zip(&truth) {
            assert!((a - b).abs() <= 1e-8 * b.abs().max(1.0));
        }
        assert!(model.diagnostics().residual_norm < 1e-10);
    }

    #[test]
    fn square_regression_interpolates() {
        let basis = build_basis(2, TruncationScheme::TotalOrder(3)).unwrap();
        let d = sobol(basis.len(), 2, 5).unwrap();
        let y: Vec<f64> = d.rows().map(|z| (3.0 * z[0]).sin() + z[1].exp()).collect();
        let model = fit_regression(&d, &y, &basis).unwrap();
        let range = 4.0;
        for (z, yi) in d.rows().zip(&y) {
            assert!((model.predict(z) - yi).abs() <= 1e-8 * range);
        }
    }

    #[test]
    fn constant_outputs() {
        let basis = build_basis(2, TruncationScheme::TotalOrder(2)).unwrap();
        let d = sobol(12, 2, 1).unwrap();
        let model = fit_regression(&d, &[2.5; 12], &basis).unwrap();
        assert!((model.coefficients()[0] - 2.5).abs() < 1e-12);
        assert!(model.coefficients()[1..].iter().all(|c| c.abs() < 1e-12));

        let tb = build_basis(2, TruncationScheme::TensorProduct(2)).unwrap();
        let g = tensor_grid(&[3, 3]).unwrap();
        let model = fit_projection(&g, &[-1.5; 9], &tb).unwrap();
        assert!((model.coefficients()[0] + 1.5).abs() < 1e-12);
        assert_eq!(model.analytic_moments().0, model.coefficients()[0]);
    }

    #[test]
    fn regression_errors() {
        let basis = build_basis(2, TruncationScheme::TotalOrder(2)).unwrap();
        let d = sobol(5, 2, 1).unwrap();
        assert!(matches!(
            fit_regression(&d, &[0.0; 5], &basis),
            Err(Error::UnderDetermined { points: 5, terms: 6 })
        ));
        let tb = build_basis(2, TruncationScheme::TensorProduct(2)).unwrap();
        let d = sobol(20, 2, 1).unwrap();
        assert!(matches!(fit_regression(&d, &[0.0; 20], &tb), Err(Error::Config(_))));
        let d = sobol(6, 2, 1).unwrap();
        assert!(fit_regression(&d, &[0.0, 1.0, f64::NAN, 0.0, 0.0, 0.0], &basis).is_err());
    }

    #[test]
    fn ill_conditioning_is_a_warning() {
        // Clustered points make the Vandermonde-like system nearly singular.
        let basis = build_basis(1, TruncationScheme::TotalOrder(4)).unwrap();
        let rows: Vec<Vec<f64>> = (0..5).map(|i| vec![1e-4 * i as f64]).collect();
        let d = Design::from_rows(rows, None).unwrap();
        let y = [0.0, 1.0, 0.0, 1.0, 0.0];
        let model = fit_regression(&d, &y, &basis).unwrap();
        assert!(model.diagnostics().condition_estimate.unwrap() > ILL_CONDITIONED);
        assert_eq!(model.diagnostics().warnings.len(), 1);
    }

    #[test]
    fn projection_picks_single_term() {
        let p = 3;
        let basis = build_basis(2, TruncationScheme::TensorProduct(p)).unwrap();
        let g = tensor_grid(&[p as usize + 1; 2]).unwrap();
        for (b, _) in basis.indices().iter().enumerate() {
            let mut coef = vec![0.0; basis.len()];
            coef[b] = 1.0;
            let y = synth(&g, &basis, &coef);
            let model = fit_projection(&g, &y, &basis).unwrap();
            for (j, c) in model.coefficients().iter().enumerate() {
                let expect = if j == b { 1.0 } else { 0.0 };
                assert!((c - expect).abs() < 1e-10, "term {b}, coef {j}: {c}");
            }
        }
    }

    #[test]
    fn projection_errors() {
        let basis = build_basis(2, TruncationScheme::TensorProduct(3)).unwrap();
        let g = tensor_grid(&[4, 3]).unwrap();
        assert!(matches!(
            fit_projection(&g, &vec![0.0; g.len()], &basis),
            Err(Error::Aliasing { dim: 1, nodes: 3, order: 3, needed: 4 })
        ));
        let s = sobol(16, 2, 1).unwrap();
        assert!(matches!(
            fit_projection(&s, &[0.0; 16], &basis),
            Err(Error::WrongDesign(_))
        ));
        let tot = build_basis(2, TruncationScheme::TotalOrder(3)).unwrap();
        let g = tensor_grid(&[4, 4]).unwrap();
        assert!(matches!(fit_projection(&g, &[0.0; 16], &tot), Err(Error::Config(_))));
    }

    #[test]
    fn pure_linear_moments() {
        let basis = build_basis(1, TruncationScheme::TotalOrder(1)).unwrap();
        let model = PceModel::from_coefficients(
            basis,
            vec![0.0, 1.0],
            FitMethod::Regression,
            FitDiagnostics::default(),
        )
        .unwrap();
        let (mean, var) = model.analytic_moments();
        assert_eq!(mean, 0.0);
        assert!((var - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn prediction_is_linear_in_coefficients() {
        let basis = build_basis(2, TruncationScheme::TotalOrder(3)).unwrap();
        let mut rng = crate::seeds::rng(8);
        let a: Vec<f64> = (0..basis.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..basis.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let mk = |c: Vec<f64>| {
            PceModel::from_coefficients(
                basis.clone(),
                c,
                FitMethod::Regression,
                FitDiagnostics::default(),
            )
            .unwrap()
        };
        let (ma, mb, ms) = (mk(a), mk(b), mk(sum));
        for _ in 0..50 {
            let z = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let lhs = ms.predict(&z);
            let rhs = ma.predict(&z) + mb.predict(&z);
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn analytic_moments_match_monte_carlo() {
        let basis = build_basis(2, TruncationScheme::TotalOrder(3)).unwrap();
        let d = sobol(30, 2, 3).unwrap();
        let y: Vec<f64> = d.rows().map(|z| (-z[0]).exp() * (2.0 * z[1]).tanh()).collect();
        let model = fit_regression(&d, &y, &basis).unwrap();
        let (mean, var) = model.analytic_moments();

        let mut rng = crate::seeds::rng(99);
        let samples: Vec<f64> = (0..100_000)
            .map(|_| model.predict(&[rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]))
            .collect();
        let mc_mean = samples.iter().sum::<f64>() / samples.len() as f64;
        let mc_var =
            samples.iter().map(|s| (s - mc_mean).powi(2)).sum::<f64>() / samples.len() as f64;
        let sd = var.sqrt();
        // Mean compared on the scale of the spread, since it can sit near 0.
        assert!((mc_mean - mean).abs() <= 0.01 * sd.max(mean.abs()));
        assert!((mc_var - var).abs() <= 0.01 * var);
    }
}
