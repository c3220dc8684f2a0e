//! Experimental designs on the standard cube.
//!
//! Three generators feed the benchmark: scrambled Sobol sequences for the
//! regression classes, tensor Gauss-Legendre grids for spectral projection,
//! and Latin hypercubes for validation.

mod lhs;
mod quadrature;
mod sobol;

use serde::{Deserialize, Serialize};

pub use lhs::latin_hypercube;
pub use quadrature::{gauss_legendre_1d, tensor_grid, tensor_grid_with_cap, QuadratureRule1D};
pub use sobol::{sobol, MAX_SOBOL_DIMENSION};

use crate::error::{Error, Result};

/// Default cap on the number of points in a tensor grid.
pub const DEFAULT_GRID_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DesignKind {
    Sobol,
    LatinHypercube,
    TensorGrid,
}

/// An `m x n` point set on `[-1, 1]^n`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    n: usize,
    points: Vec<f64>,
    kind: DesignKind,
    weights: Option<Vec<f64>>,
    grid_orders: Option<Vec<usize>>,
    seed: u64,
}

impl Design {
    pub(crate) fn from_parts(
        n: usize,
        points: Vec<f64>,
        kind: DesignKind,
        weights: Option<Vec<f64>>,
        grid_orders: Option<Vec<usize>>,
        seed: u64,
    ) -> Self {
        debug_assert!(n > 0 && points.len().is_multiple_of(n));
        Self {
            n,
            points,
            kind,
            weights,
            grid_orders,
            seed,
        }
    }

    /// Build a design from raw rows, e.g. when reading a design file.
    ///
    /// Weighted designs are tagged as tensor grids and their per-dimension
    /// node counts are recovered from the distinct coordinates; the grid
    /// must be a full tensor product.
    pub fn from_rows(rows: Vec<Vec<f64>>, weights: Option<Vec<f64>>) -> Result<Self> {
        let n = rows
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidInput("design has no points".into()))?;
        if n == 0 {
            return Err(Error::InvalidInput("design has zero columns".into()));
        }
        let m = rows.len();
        let mut points = Vec::with_capacity(m * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidInput(format!(
                    "row {i} has {} columns, expected {n}",
                    row.len()
                )));
            }
            for (j, &z) in row.iter().enumerate() {
                if !(z.abs() <= 1.0 + crate::domain::CUBE_TOLERANCE) {
                    return Err(Error::OutOfBounds {
                        dim: j,
                        name: format!("x{}", j + 1),
                        value: z,
                        lower: -1.0,
                        upper: 1.0,
                    });
                }
            }
            points.extend_from_slice(row);
        }
        let (kind, grid_orders) = match &weights {
            Some(w) => {
                if w.len() != m {
                    return Err(Error::LengthMismatch {
                        left: m,
                        right: w.len(),
                    });
                }
                if w.iter().any(|&x| !(x > 0.0)) {
                    return Err(Error::InvalidInput("weights must be positive".into()));
                }
                let orders: Vec<usize> = (0..n)
                    .map(|j| {
                        let mut col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
                        col.sort_by(f64::total_cmp);
                        col.dedup();
                        col.len()
                    })
                    .collect();
                if orders.iter().product::<usize>() != m {
                    return Err(Error::WrongDesign(
                        "weighted design is not a full tensor grid".into(),
                    ));
                }
                (DesignKind::TensorGrid, Some(orders))
            }
            None => (DesignKind::Sobol, None),
        };
        Ok(Self::from_parts(n, points, kind, weights, grid_orders, 0))
    }

    pub fn with_kind(mut self, kind: DesignKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> DesignKind {
        self.kind
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    /// Nodes per dimension for tensor grids.
    pub fn grid_orders(&self) -> Option<&[usize]> {
        self.grid_orders.as_deref()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.points[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.points.chunks_exact(self.n)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.points
    }

    /// First `m` rows. Weights are dropped, since a truncated grid is no
    /// longer a quadrature rule.
    pub fn prefix(&self, m: usize) -> Design {
        let m = m.min(self.len());
        Design {
            n: self.n,
            points: self.points[..m * self.n].to_vec(),
            kind: self.kind,
            weights: None,
            grid_orders: None,
            seed: self.seed,
        }
    }

    /// Select rows by index, keeping the kind tag.
    pub fn select(&self, indices: &[usize]) -> Design {
        let mut points = Vec::with_capacity(indices.len() * self.n);
        for &i in indices {
            points.extend_from_slice(self.row(i));
        }
        let weights = self
            .weights
            .as_ref()
            .map(|w| indices.iter().map(|&i| w[i]).collect());
        Design {
            n: self.n,
            points,
            kind: self.kind,
            weights,
            grid_orders: self.grid_orders.clone(),
            seed: self.seed,
        }
    }
}

/// The three design classes used to size experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum DesignClass {
    /// Sobol design with exactly as many points as total-order terms.
    UniquelyDetermined,
    /// Sobol design with twice as many points as total-order terms.
    OverDetermined,
    /// Tensor Gauss-Legendre grid with `p + 1` nodes per dimension.
    TensorGrid,
}

impl DesignClass {
    pub const ALL: [DesignClass; 3] = [
        DesignClass::UniquelyDetermined,
        DesignClass::OverDetermined,
        DesignClass::TensorGrid,
    ];

    pub fn number(self) -> u8 {
        match self {
            DesignClass::UniquelyDetermined => 1,
            DesignClass::OverDetermined => 2,
            DesignClass::TensorGrid => 3,
        }
    }
}

impl TryFrom<u8> for DesignClass {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(DesignClass::UniquelyDetermined),
            2 => Ok(DesignClass::OverDetermined),
            3 => Ok(DesignClass::TensorGrid),
            other => Err(Error::Config(format!("design class must be 1, 2 or 3, got {other}"))),
        }
    }
}

impl From<DesignClass> for u8 {
    fn from(c: DesignClass) -> u8 {
        c.number()
    }
}

/// `C(n + p, p)`, saturating at `u128::MAX`.
pub fn total_order_terms(n: usize, p: usize) -> u128 {
    let mut acc: u128 = 1;
    for i in 1..=p as u128 {
        acc = match acc.checked_mul(n as u128 + i) {
            Some(v) => v / i,
            None => return u128::MAX,
        };
    }
    acc
}

/// `(p + 1)^n`, saturating at `u128::MAX`.
pub fn tensor_terms(n: usize, p: usize) -> u128 {
    (0..n).try_fold(1u128, |acc, _| acc.checked_mul(p as u128 + 1)).unwrap_or(u128::MAX)
}

/// Design size for class `class` at truncation order `p` in `n` dimensions.
pub fn design_class_size(n: usize, p: usize, class: DesignClass) -> u128 {
    match class {
        DesignClass::UniquelyDetermined => total_order_terms(n, p),
        DesignClass::OverDetermined => total_order_terms(n, p).saturating_mul(2),
        DesignClass::TensorGrid => tensor_terms(n, p),
    }
}
