use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::designs::Design;
use crate::error::{Error, Result};

/// Regression functions `h(z)` of the prior mean: monomials of total degree
/// at most two, always starting with the constant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<u32>>", into = "Vec<Vec<u32>>")]
pub struct MeanBasis {
    n: usize,
    terms: Vec<Vec<u32>>,
}

impl TryFrom<Vec<Vec<u32>>> for MeanBasis {
    type Error = Error;

    fn try_from(terms: Vec<Vec<u32>>) -> Result<Self> {
        MeanBasis::new(terms)
    }
}

impl From<MeanBasis> for Vec<Vec<u32>> {
    fn from(b: MeanBasis) -> Self {
        b.terms
    }
}

impl MeanBasis {
    pub fn new(terms: Vec<Vec<u32>>) -> Result<Self> {
        let n = terms
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidInput("mean basis needs at least one term".into()))?;
        if n == 0 || terms.iter().any(|t| t.len() != n) {
            return Err(Error::InvalidInput("mean basis terms must share one dimension".into()));
        }
        if terms[0].iter().any(|&e| e != 0) {
            return Err(Error::InvalidInput("first mean basis term must be the constant".into()));
        }
        if terms.iter().any(|t| t.iter().sum::<u32>() > 2) {
            return Err(Error::InvalidInput("mean basis terms have degree at most 2".into()));
        }
        for (i, t) in terms.iter().enumerate() {
            if terms[..i].contains(t) {
                return Err(Error::InvalidInput(format!("duplicate mean basis term {t:?}")));
            }
        }
        Ok(Self { n, terms })
    }

    pub fn constant(n: usize) -> Self {
        Self {
            n,
            terms: vec![vec![0; n]],
        }
    }

    /// Constant plus one linear term per input.
    pub fn linear(n: usize) -> Self {
        let mut terms = vec![vec![0; n]];
        for j in 0..n {
            let mut t = vec![0; n];
            t[j] = 1;
            terms.push(t);
        }
        Self { n, terms }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[Vec<u32>] {
        &self.terms
    }

    pub fn eval(&self, z: &[f64]) -> Vec<f64> {
        self.terms.iter().map(|t| monomial(t, z)).collect()
    }

    /// `m x q` regression matrix over the design.
    pub fn matrix(&self, design: &Design) -> DMatrix<f64> {
        DMatrix::from_fn(design.len(), self.len(), |i, k| {
            monomial(&self.terms[k], design.row(i))
        })
    }
}

fn monomial(exps: &[u32], z: &[f64]) -> f64 {
    exps.iter()
        .zip(z)
        .map(|(&e, &x)| x.powi(e as i32))
        .product()
}

/// Candidate terms in tie-break order: linear, pure quadratic, interactions.
fn candidates(n: usize, max_degree: u32) -> Vec<Vec<u32>> {
    let unit = |j: usize, e: u32| {
        let mut t = vec![0; n];
        t[j] = e;
        t
    };
    let mut out: Vec<Vec<u32>> = (0..n).map(|j| unit(j, 1)).collect();
    if max_degree >= 2 {
        out.extend((0..n).map(|j| unit(j, 2)));
        for i in 0..n {
            for j in i + 1..n {
                let mut t = vec![0; n];
                t[i] = 1;
                t[j] = 1;
                out.push(t);
            }
        }
    }
    out
}

/// Residual sum of squares of an OLS fit, or `None` if the columns are
/// numerically dependent.
fn ols_rss(h: &DMatrix<f64>, y: &DVector<f64>) -> Option<f64> {
    let qr = h.clone().qr();
    let r = qr.r();
    let rmax = r.diagonal().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if r.diagonal().iter().any(|v| v.abs() <= 1e-10 * rmax) {
        return None;
    }
    let coef = r.solve_upper_triangular(&(qr.q().transpose() * y))?;
    Some((h * coef - y).norm_squared())
}

/// Forward stepwise selection of the prior mean basis by BIC.
///
/// Starting from the constant, the candidate whose OLS fit lowers
/// `m ln(RSS/m) + q ln m` the most is added until no candidate helps or `q`
/// reaches `min(m - 3, floor(m / 3))`. RSS is floored at `1e-12` times the
/// total sum of squares so that exact fits stop the search instead of
/// chasing rounding noise.
pub fn stepwise_mean_basis(design: &Design, y: &[f64], max_degree: u32) -> Result<MeanBasis> {
    let n = design.dim();
    let m = design.len();
    if y.len() != m {
        return Err(Error::LengthMismatch { left: m, right: y.len() });
    }
    if m < 5 {
        log::warn!("{m} design points are too few for stepwise selection; using a constant mean");
        return Ok(MeanBasis::constant(n));
    }
    let cap = (m - 3).min(m / 3);
    let mean = y.iter().sum::<f64>() / m as f64;
    let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    if !(tss > 0.0) {
        return Ok(MeanBasis::constant(n));
    }
    let floor = 1e-12 * tss;
    let yv = DVector::from_column_slice(y);
    let mf = m as f64;
    let bic = |rss: f64, q: usize| mf * (rss.max(floor) / mf).ln() + q as f64 * mf.ln();

    let mut basis = MeanBasis::constant(n);
    let mut current = bic(tss, 1);
    let mut pool = candidates(n, max_degree);
    while basis.len() < cap && !pool.is_empty() {
        let mut best: Option<(usize, f64)> = None;
        for (ci, cand) in pool.iter().enumerate() {
            let mut terms = basis.terms.clone();
            terms.push(cand.clone());
            let trial = MeanBasis { n, terms };
            let Some(rss) = ols_rss(&trial.matrix(design), &yv) else {
                continue;
            };
            let score = bic(rss, trial.len());
            if score < current && best.is_none_or(|(_, s)| score < s) {
                best = Some((ci, score));
            }
        }
        match best {
            Some((ci, score)) => {
                basis.terms.push(pool.remove(ci));
                current = score;
            }
            None => break,
        }
    }
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designs::sobol;

    #[test]
    fn linear_response_selects_linear_term() {
        let d = sobol(30, 3, 7).unwrap();
        let y: Vec<f64> = d.rows().map(|z| 1.5 - 2.0 * z[0]).collect();
        let b = stepwise_mean_basis(&d, &y, 2).unwrap();
        assert_eq!(b.terms(), &[vec![0, 0, 0], vec![1, 0, 0]]);
    }

    #[test]
    fn constant_response_keeps_constant() {
        let d = sobol(20, 2, 7).unwrap();
        let b = stepwise_mean_basis(&d, &[4.0; 20], 2).unwrap();
        assert_eq!(b, MeanBasis::constant(2));
    }

    #[test]
    fn small_designs_fall_back() {
        let d = sobol(4, 2, 7).unwrap();
        let b = stepwise_mean_basis(&d, &[1.0, 2.0, 3.0, 5.0], 2).unwrap();
        assert_eq!(b.len(), 1);
    }

    #[test]
    fn cap_respected() {
        for m in 5..40 {
            let d = sobol(m, 3, 2).unwrap();
            let y: Vec<f64> = d
                .rows()
                .map(|z| z[0] + z[1] * z[2] + z[0] * z[0] + (5.0 * z[1]).sin())
                .collect();
            let b = stepwise_mean_basis(&d, &y, 2).unwrap();
            assert!(b.len() <= (m / 3).max(1), "m={m}: q={}", b.len());
            assert!(b.len() + 3 <= m);
        }
    }

    #[test]
    fn quadratic_response_picks_terms() {
        let d = sobol(40, 2, 3).unwrap();
        let y: Vec<f64> = d.rows().map(|z| z[0] * z[1] + 0.5 * z[1] * z[1]).collect();
        let b = stepwise_mean_basis(&d, &y, 2).unwrap();
        assert!(b.terms().contains(&vec![1, 1]));
        assert!(b.terms().contains(&vec![0, 2]));
    }

    #[test]
    fn validation_of_terms() {
        assert!(MeanBasis::new(vec![vec![1, 0]]).is_err());
        assert!(MeanBasis::new(vec![vec![0, 0], vec![2, 1]]).is_err());
        assert!(MeanBasis::new(vec![vec![0, 0], vec![1, 0], vec![1, 0]]).is_err());
        let b: MeanBasis = serde_json::from_str("[[0,0],[0,1]]").unwrap();
        assert_eq!(b.eval(&[0.5, -2.0]), vec![1.0, -2.0]);
    }
}
