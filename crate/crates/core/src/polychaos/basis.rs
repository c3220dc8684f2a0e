use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::designs::{tensor_terms, total_order_terms, Design};
use crate::error::{Error, Result};

/// Default cap on the number of basis terms.
pub const DEFAULT_BASIS_CAP: usize = 100_000;

/// Legendre polynomial `P_k(z)` by the three-term recurrence.
pub fn legendre_eval(k: usize, z: f64) -> f64 {
    match k {
        0 => 1.0,
        1 => z,
        _ => {
            let (mut prev, mut cur) = (1.0, z);
            for j in 1..k {
                let jf = j as f64;
                let next = ((2.0 * jf + 1.0) * z * cur - jf * prev) / (jf + 1.0);
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// `P_0(z), ..., P_max(z)` written into `out`.
pub fn legendre_all(max: usize, z: f64, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    if max == 0 {
        return;
    }
    out.push(z);
    for j in 1..max {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0) * z * out[j] - jf * out[j - 1]) / (jf + 1.0);
        out.push(next);
    }
}

/// `E[P_k(Z)^2]` for `Z` uniform on `[-1, 1]`.
pub fn norm_squared(k: usize) -> f64 {
    1.0 / (2 * k + 1) as f64
}

/// Per-dimension polynomial degrees of one chaos term.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn max_degree(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, a) in self.0.iter().enumerate() {
            if j > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scheme", content = "p", rename_all = "kebab-case")]
pub enum TruncationScheme {
    /// `|alpha|_1 <= p`.
    TotalOrder(u32),
    /// `max_j alpha_j <= p`.
    TensorProduct(u32),
}

impl TruncationScheme {
    pub fn order(self) -> u32 {
        match self {
            TruncationScheme::TotalOrder(p) | TruncationScheme::TensorProduct(p) => p,
        }
    }

    pub fn term_count(self, n: usize) -> u128 {
        match self {
            TruncationScheme::TotalOrder(p) => total_order_terms(n, p as usize),
            TruncationScheme::TensorProduct(p) => tensor_terms(n, p as usize),
        }
    }

    fn admits(self, alpha: &[u32]) -> bool {
        match self {
            TruncationScheme::TotalOrder(p) => alpha.iter().sum::<u32>() <= p,
            TruncationScheme::TensorProduct(p) => alpha.iter().all(|&a| a <= p),
        }
    }

    fn max_total_degree(self, n: usize) -> u32 {
        match self {
            TruncationScheme::TotalOrder(p) => p,
            TruncationScheme::TensorProduct(p) => p * n as u32,
        }
    }
}

/// Ordered chaos basis with squared norms `gamma_alpha^2`.
///
/// Terms are in graded order: by total degree, then by descending
/// lexicographic order of the degree vector, so in two dimensions the
/// quadratic total-order basis reads `00, 10, 01, 20, 11, 02`.
#[derive(Debug, Clone, PartialEq)]
pub struct PceBasis {
    n: usize,
    scheme: TruncationScheme,
    indices: Vec<MultiIndex>,
    norms_sq: Vec<f64>,
}

impl PceBasis {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn scheme(&self) -> TruncationScheme {
        self.scheme
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    /// `gamma_alpha^2` for each term.
    pub fn norms_sq(&self) -> &[f64] {
        &self.norms_sq
    }

    /// Largest single-dimension degree in the basis.
    pub fn max_degree(&self) -> usize {
        self.indices.iter().map(MultiIndex::max_degree).max().unwrap_or(0) as usize
    }

    /// Evaluate every basis term at `z`.
    pub fn eval_into(&self, z: &[f64], table: &mut Vec<Vec<f64>>, out: &mut [f64]) {
        let pmax = self.max_degree();
        table.resize_with(self.n, Vec::new);
        for (j, &zj) in z.iter().enumerate() {
            legendre_all(pmax, zj, &mut table[j]);
        }
        for (o, alpha) in out.iter_mut().zip(&self.indices) {
            *o = alpha
                .0
                .iter()
                .enumerate()
                .map(|(j, &a)| table[j][a as usize])
                .product();
        }
    }

    pub fn eval(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.eval_into(z, &mut Vec::new(), &mut out);
        out
    }

    /// Rebuild from stored indices, checking they match the scheme exactly.
    pub fn from_indices(n: usize, scheme: TruncationScheme, indices: Vec<MultiIndex>) -> Result<Self> {
        let expected = build_basis(n, scheme)?;
        if expected.indices != indices {
            return Err(Error::InvalidInput(
                "stored multi-indices do not match the truncation scheme".into(),
            ));
        }
        Ok(expected)
    }
}

fn compositions_desc(total: u32, n: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if n == 1 {
        prefix.push(total);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in (0..=total).rev() {
        prefix.push(first);
        compositions_desc(total - first, n - 1, prefix, out);
        prefix.pop();
    }
}

pub fn build_basis(n: usize, scheme: TruncationScheme) -> Result<PceBasis> {
    build_basis_with_cap(n, scheme, DEFAULT_BASIS_CAP)
}

pub fn build_basis_with_cap(n: usize, scheme: TruncationScheme, cap: usize) -> Result<PceBasis> {
    if n == 0 {
        return Err(Error::InvalidInput("basis dimension must be at least 1".into()));
    }
    let size = scheme.term_count(n);
    if size > cap as u128 {
        return Err(Error::BasisTooLarge { size, cap });
    }
    let mut indices = Vec::with_capacity(size as usize);
    let mut buf = Vec::new();
    for deg in 0..=scheme.max_total_degree(n) {
        let mut level = Vec::new();
        compositions_desc(deg, n, &mut buf, &mut level);
        indices.extend(level.into_iter().filter(|a| scheme.admits(a)).map(MultiIndex));
    }
    debug_assert_eq!(indices.len() as u128, size);
    let norms_sq = indices
        .iter()
        .map(|a| a.0.iter().map(|&k| norm_squared(k as usize)).product())
        .collect();
    Ok(PceBasis {
        n,
        scheme,
        indices,
        norms_sq,
    })
}

/// `m x N` matrix of basis terms evaluated at the design points.
pub fn basis_matrix(design: &Design, basis: &PceBasis) -> Result<DMatrix<f64>> {
    if design.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            got: design.dim(),
        });
    }
    let (m, big_n) = (design.len(), basis.len());
    let mut psi = DMatrix::zeros(m, big_n);
    let mut table = Vec::new();
    let mut row = vec![0.0; big_n];
    for (i, z) in design.rows().enumerate() {
        basis.eval_into(z, &mut table, &mut row);
        for (j, v) in row.iter().enumerate() {
            psi[(i, j)] = *v;
        }
    }
    Ok(psi)
}
