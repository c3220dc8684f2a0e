use nalgebra::{DMatrix, DVector};
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::kernel::{Kernel, KernelFamily};
use super::likelihood::{factorize, gradient, Factorization};
use super::mean_basis::MeanBasis;
use super::optimize::{minimize_box, BfgsConfig};
use crate::designs::{latin_hypercube, Design};
use crate::error::{Error, Result};
use crate::io::digest_data;
use crate::linalg::cholesky_with_jitter;
use crate::seeds;

/// Default cap on the number of points in one joint posterior draw.
pub const DEFAULT_SAMPLE_CAP: usize = 2000;

/// Width of the standard cube along every input.
const CUBE_WIDTH: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpFitConfig {
    /// Number of optimiser starts, spread by a Latin hypercube over the
    /// log-length box.
    pub starts: usize,
    pub seed: u64,
    /// Length bounds are `[lower_factor, upper_factor]` times the cube width.
    pub lower_factor: f64,
    pub upper_factor: f64,
    pub max_iter: usize,
}

impl Default for GpFitConfig {
    fn default() -> Self {
        Self {
            starts: 5,
            seed: 0,
            lower_factor: 1e-2,
            upper_factor: 1e2,
            max_iter: 200,
        }
    }
}

/// Student-t marginal posterior at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorPrediction {
    pub mean: f64,
    pub variance: f64,
    pub dof: usize,
}

/// A fitted emulator with its cached factorisation.
pub struct GpModel {
    design: Design,
    y: Vec<f64>,
    kernel: Kernel,
    mean_basis: MeanBasis,
    seed: u64,
    f: Factorization,
}

impl std::fmt::Debug for GpModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GpModel")
            .field("kernel", &self.kernel)
            .field("mean_basis", &self.mean_basis)
            .field("beta", &self.f.beta.as_slice())
            .field("lambda_sq", &self.f.lambda_sq)
            .field("jitter", &self.f.jitter)
            .finish()
    }
}

fn check_fit_inputs(design: &Design, y: &[f64], mean_basis: &MeanBasis) -> Result<()> {
    if y.len() != design.len() {
        return Err(Error::LengthMismatch {
            left: design.len(),
            right: y.len(),
        });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("simulator outputs must be finite".into()));
    }
    let (m, q) = (design.len(), mean_basis.len());
    if m <= q + 2 {
        return Err(Error::Fit(format!(
            "{m} design points with {q} mean terms; need m > q + 2 for a proper posterior"
        )));
    }
    Ok(())
}

/// Fit correlation lengths by maximising the marginal likelihood over
/// `log(length)` from several starts; the best start wins, ties going to the
/// earliest.
pub fn fit(
    design: &Design,
    y: &[f64],
    family: KernelFamily,
    mean_basis: &MeanBasis,
    config: &GpFitConfig,
) -> Result<GpModel> {
    check_fit_inputs(design, y, mean_basis)?;
    let n = design.dim();
    if mean_basis.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: mean_basis.dim(),
        });
    }
    let lower = vec![(config.lower_factor * CUBE_WIDTH).ln(); n];
    let upper = vec![(config.upper_factor * CUBE_WIDTH).ln(); n];
    let starts = latin_hypercube(config.starts.max(1), n, seeds::derive(config.seed, "gp/starts"))?;
    let bfgs = BfgsConfig {
        max_iter: config.max_iter,
        ..Default::default()
    };

    let objective = |theta: &[f64]| -> Option<(f64, Vec<f64>)> {
        let lengths: Vec<f64> = theta.iter().map(|t| t.exp()).collect();
        let kernel = Kernel::new(family, lengths).ok()?;
        let f = factorize(design, y, mean_basis, &kernel, None).ok()?;
        let g = gradient(&f, design, mean_basis, &kernel);
        Some((-f.log_lik, g.into_iter().map(|v| -v).collect()))
    };

    let mut best: Option<(f64, Vec<f64>)> = None;
    for z in starts.rows() {
        let start: Vec<f64> = z
            .iter()
            .zip(lower.iter().zip(&upper))
            .map(|(zj, (lo, hi))| lo + 0.5 * (zj + 1.0) * (hi - lo))
            .collect();
        let Some(found) = minimize_box(objective, &start, &lower, &upper, &bfgs) else {
            continue;
        };
        if best.as_ref().is_none_or(|(v, _)| found.value < *v) {
            best = Some((found.value, found.x));
        }
    }
    let (_, theta) = best.ok_or_else(|| {
        Error::Fit("correlation matrix could not be factorised from any start".into())
    })?;
    let kernel = Kernel::new(family, theta.iter().map(|t| t.exp()).collect())?;
    GpModel::with_kernel(design.clone(), y.to_vec(), kernel, mean_basis.clone(), config.seed)
}

impl GpModel {
    /// Condition on the data at fixed correlation lengths.
    pub fn with_kernel(
        design: Design,
        y: Vec<f64>,
        kernel: Kernel,
        mean_basis: MeanBasis,
        seed: u64,
    ) -> Result<Self> {
        check_fit_inputs(&design, &y, &mean_basis)?;
        if kernel.dim() != design.dim() {
            return Err(Error::DimensionMismatch {
                expected: design.dim(),
                got: kernel.dim(),
            });
        }
        let f = factorize(&design, &y, &mean_basis, &kernel, None)?;
        Ok(Self {
            design,
            y,
            kernel,
            mean_basis,
            seed,
            f,
        })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn mean_basis(&self) -> &MeanBasis {
        &self.mean_basis
    }

    pub fn design(&self) -> &Design {
        &self.design
    }

    pub fn outputs(&self) -> &[f64] {
        &self.y
    }

    pub fn beta(&self) -> &[f64] {
        self.f.beta.as_slice()
    }

    pub fn lambda_sq(&self) -> f64 {
        self.f.lambda_sq
    }

    pub fn jitter(&self) -> f64 {
        self.f.jitter
    }

    pub fn log_likelihood(&self) -> f64 {
        self.f.log_lik
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Degrees of freedom `m - q` of the Student-t posterior.
    pub fn dof(&self) -> usize {
        self.design.len() - self.mean_basis.len()
    }

    /// `lambda_hat^2 / (m - q - 2)`.
    fn scale(&self) -> f64 {
        self.f.lambda_sq / (self.dof() - 2) as f64
    }

    fn correlations(&self, z: &[f64]) -> DVector<f64> {
        DVector::from_iterator(
            self.design.len(),
            self.design.rows().map(|x| self.kernel.eval(z, x)),
        )
    }

    fn check_point(&self, z: &[f64]) {
        assert_eq!(z.len(), self.design.dim(), "prediction point has the wrong dimension");
    }

    /// Posterior mean `h(z)' beta + r(z)' A^-1 (Y - H beta)`.
    pub fn predict_mean(&self, z: &[f64]) -> f64 {
        self.check_point(z);
        let r = self.correlations(z);
        let h = DVector::from_vec(self.mean_basis.eval(z));
        h.dot(&self.f.beta) + r.dot(&self.f.alpha)
    }

    pub fn predict(&self, z: &[f64]) -> PosteriorPrediction {
        self.check_point(z);
        let r = self.correlations(z);
        let h = DVector::from_vec(self.mean_basis.eval(z));
        let mean = h.dot(&self.f.beta) + r.dot(&self.f.alpha);
        let u = self.f.chol.l().solve_lower_triangular(&r).expect("factor is nonsingular");
        let qv = &h - self.f.ainv_h.transpose() * &r;
        let inner = 1.0 - u.norm_squared() + qv.dot(&(&self.f.g_inv * &qv));
        PosteriorPrediction {
            mean,
            variance: (self.scale() * inner).max(0.0),
            dof: self.dof(),
        }
    }

    /// Posterior covariance `V*(a, b)`, including the mean-coefficient term.
    pub fn predict_cov(&self, a: &[f64], b: &[f64]) -> f64 {
        self.check_point(a);
        self.check_point(b);
        let ra = self.correlations(a);
        let rb = self.correlations(b);
        let l = self.f.chol.l();
        let ua = l.solve_lower_triangular(&ra).expect("factor is nonsingular");
        let ub = l.solve_lower_triangular(&rb).expect("factor is nonsingular");
        let qa = DVector::from_vec(self.mean_basis.eval(a)) - self.f.ainv_h.transpose() * &ra;
        let qb = DVector::from_vec(self.mean_basis.eval(b)) - self.f.ainv_h.transpose() * &rb;
        let v = self.scale() * (self.kernel.eval(a, b) - ua.dot(&ub) + qa.dot(&(&self.f.g_inv * &qb)));
        if a == b {
            v.max(0.0)
        } else {
            v
        }
    }

    /// Joint posterior mean vector and covariance matrix over `points`.
    pub fn predict_joint(&self, points: &Design) -> (DVector<f64>, DMatrix<f64>) {
        assert_eq!(points.dim(), self.design.dim());
        let p = points.len();
        let m = self.design.len();
        let r = DMatrix::from_fn(m, p, |i, k| self.kernel.eval(self.design.row(i), points.row(k)));
        let hp = self.mean_basis.matrix(points);
        let mean = &hp * &self.f.beta + r.transpose() * &self.f.alpha;
        let u = self
            .f
            .chol
            .l()
            .solve_lower_triangular(&r)
            .expect("factor is nonsingular");
        let qm = &hp - r.transpose() * &self.f.ainv_h;
        let mut cov = DMatrix::from_fn(p, p, |i, k| self.kernel.eval(points.row(i), points.row(k)));
        cov -= u.transpose() * &u;
        cov += &qm * &self.f.g_inv * qm.transpose();
        cov *= self.scale();
        for i in 0..p {
            for k in 0..i {
                let s = 0.5 * (cov[(i, k)] + cov[(k, i)]);
                cov[(i, k)] = s;
                cov[(k, i)] = s;
            }
            cov[(i, i)] = cov[(i, i)].max(0.0);
        }
        (mean, cov)
    }

    /// `samples` joint draws from the multivariate Student-t posterior at
    /// `points`; each draw shares one chi-square scale across the points.
    pub fn sample_posterior(&self, points: &Design, samples: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        self.sample_posterior_with_cap(points, samples, seed, DEFAULT_SAMPLE_CAP)
    }

    pub fn sample_posterior_with_cap(
        &self,
        points: &Design,
        samples: usize,
        seed: u64,
        cap: usize,
    ) -> Result<Vec<Vec<f64>>> {
        if points.len() > cap {
            return Err(Error::InvalidInput(format!(
                "{} sample points exceed the cap of {cap}",
                points.len()
            )));
        }
        if points.dim() != self.design.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.design.dim(),
                got: points.dim(),
            });
        }
        let (mean, cov) = self.predict_joint(points);
        let (chol, _) = cholesky_with_jitter(&cov).ok_or_else(|| Error::NotPositiveDefinite {
            lengths: self.kernel.lengths().to_vec(),
            jitter: crate::linalg::JITTER_MAX,
        })?;
        let l = chol.l();
        let p = points.len();
        let nu = self.dof() as f64;
        let chi = ChiSquared::new(nu).map_err(|e| Error::Fit(e.to_string()))?;
        let mut rng = seeds::rng(seed);
        // Draw every standard normal first, in sample order, then form all
        // draws with one matrix product.
        let mut z = DMatrix::zeros(p, samples);
        let mut scales = Vec::with_capacity(samples);
        for s in 0..samples {
            for v in z.column_mut(s).iter_mut() {
                *v = StandardNormal.sample(&mut rng);
            }
            let w: f64 = chi.sample(&mut rng);
            scales.push((nu / w).sqrt());
        }
        let lz = &l * &z;
        let out = (0..samples)
            .map(|s| {
                lz.column(s)
                    .iter()
                    .zip(mean.iter())
                    .map(|(d, m)| m + d * scales[s])
                    .collect()
            })
            .collect();
        Ok(out)
    }

    /// Predictions (posterior means) at every row of `points`.
    pub fn predict_design(&self, points: &Design) -> Vec<f64> {
        points.rows().map(|z| self.predict_mean(z)).collect()
    }
}

/// On-disk form of a [`GpModel`]. Training data travel with the model;
/// factorisations are rebuilt on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpModelFile {
    pub kind: String,
    pub family: KernelFamily,
    pub lengths: Vec<f64>,
    pub mean_basis: MeanBasis,
    pub beta: Vec<f64>,
    pub lambda_sq: f64,
    pub jitter: f64,
    pub seed: u64,
    pub digest: String,
    pub design: Vec<Vec<f64>>,
    pub outputs: Vec<f64>,
}

pub(crate) const GP_KIND: &str = "gp";

impl From<&GpModel> for GpModelFile {
    fn from(m: &GpModel) -> Self {
        Self {
            kind: GP_KIND.into(),
            family: m.kernel.family,
            lengths: m.kernel.lengths().to_vec(),
            mean_basis: m.mean_basis.clone(),
            beta: m.beta().to_vec(),
            lambda_sq: m.lambda_sq(),
            jitter: m.jitter(),
            seed: m.seed,
            digest: digest_data(&m.design, &m.y),
            design: m.design.rows().map(<[f64]>::to_vec).collect(),
            outputs: m.y.clone(),
        }
    }
}

impl TryFrom<GpModelFile> for GpModel {
    type Error = Error;

    fn try_from(file: GpModelFile) -> Result<Self> {
        if file.kind != GP_KIND {
            return Err(Error::InvalidInput(format!(
                "expected a '{GP_KIND}' model, found '{}'",
                file.kind
            )));
        }
        let design = Design::from_rows(file.design, None)?;
        if digest_data(&design, &file.outputs) != file.digest {
            return Err(Error::InvalidInput(
                "model digest does not match its training data".into(),
            ));
        }
        let kernel = Kernel::new(file.family, file.lengths)?;
        check_fit_inputs(&design, &file.outputs, &file.mean_basis)?;
        let f = factorize(&design, &file.outputs, &file.mean_basis, &kernel, Some(file.jitter))?;
        Ok(Self {
            design,
            y: file.outputs,
            kernel,
            mean_basis: file.mean_basis,
            seed: file.seed,
            f,
        })
    }
}
