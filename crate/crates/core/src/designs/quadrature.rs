use std::f64::consts::PI;

use super::{Design, DesignKind, DEFAULT_GRID_CAP};
use crate::error::{Error, Result};

const MAX_ORDER: usize = 64;
const NEWTON_TOL: f64 = 1e-15;

/// Gauss-Legendre rule on `[-1, 1]` with weights normalised to sum to one,
/// so that `sum w_i f(x_i)` approximates `E[f(Z)]` for uniform `Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule1D {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn expectation(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// `(P_k(x), P_{k-1}(x))` by the three-term recurrence.
fn legendre_pair(k: usize, x: f64) -> (f64, f64) {
    let (mut p_prev, mut p) = (1.0, x);
    if k == 0 {
        return (1.0, 0.0);
    }
    for j in 1..k {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0) * x * p - jf * p_prev) / (jf + 1.0);
        p_prev = p;
        p = next;
    }
    (p, p_prev)
}

/// `k`-point Gauss-Legendre rule, `1 <= k <= 64`.
///
/// Nodes are found by Newton iteration from Tricomi's asymptotic guesses and
/// then symmetrised, so `nodes[i] == -nodes[k - 1 - i]` exactly.
pub fn gauss_legendre_1d(k: usize) -> Result<QuadratureRule1D> {
    if !(1..=MAX_ORDER).contains(&k) {
        return Err(Error::QuadratureOrder(k));
    }
    let kf = k as f64;
    let mut nodes = vec![0.0; k];
    let mut weights = vec![0.0; k];
    for i in 0..k.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (kf + 0.5)).cos();
        let mut deriv = 0.0;
        for _ in 0..100 {
            let (p, p_prev) = legendre_pair(k, x);
            deriv = kf * (x * p - p_prev) / (x * x - 1.0);
            let dx = p / deriv;
            x -= dx;
            if dx.abs() <= NEWTON_TOL {
                break;
            }
        }
        // Refresh the derivative at the converged root.
        let (p, p_prev) = legendre_pair(k, x);
        if x != 1.0 {
            deriv = kf * (x * p - p_prev) / (x * x - 1.0);
        }
        let w = 1.0 / ((1.0 - x * x) * deriv * deriv);
        // Descending cos guesses: i-th root from the top.
        nodes[k - 1 - i] = x;
        nodes[i] = -x;
        weights[k - 1 - i] = w;
        weights[i] = w;
    }
    if k % 2 == 1 {
        nodes[k / 2] = 0.0;
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok(QuadratureRule1D { nodes, weights })
}

/// Full tensor product of 1-D Gauss-Legendre rules, `orders[j]` nodes along
/// dimension `j`. The last dimension varies fastest.
pub fn tensor_grid(orders: &[usize]) -> Result<Design> {
    tensor_grid_with_cap(orders, DEFAULT_GRID_CAP)
}

pub fn tensor_grid_with_cap(orders: &[usize], cap: usize) -> Result<Design> {
    if orders.is_empty() {
        return Err(Error::InvalidInput("tensor grid needs at least one dimension".into()));
    }
    let size = orders
        .iter()
        .try_fold(1u128, |acc, &k| acc.checked_mul(k as u128))
        .unwrap_or(u128::MAX);
    if size > cap as u128 {
        return Err(Error::DesignTooLarge { size, cap });
    }
    let rules = orders
        .iter()
        .map(|&k| gauss_legendre_1d(k))
        .collect::<Result<Vec<_>>>()?;
    let n = orders.len();
    let m = size as usize;
    let mut points = Vec::with_capacity(m * n);
    let mut weights = Vec::with_capacity(m);
    let mut idx = vec![0usize; n];
    for _ in 0..m {
        let mut w = 1.0;
        for (j, rule) in rules.iter().enumerate() {
            points.push(rule.nodes[idx[j]]);
            w *= rule.weights[idx[j]];
        }
        weights.push(w);
        for j in (0..n).rev() {
            idx[j] += 1;
            if idx[j] < orders[j] {
                break;
            }
            idx[j] = 0;
        }
    }
    Ok(Design::from_parts(
        n,
        points,
        DesignKind::TensorGrid,
        Some(weights),
        Some(orders.to_vec()),
        0,
    ))
}
