//! Box-constrained quasi-Newton minimisation.
//!
//! A projected BFGS method: variables pinned at a bound with the gradient
//! pushing outward are frozen for the step, the remaining ones follow the
//! inverse-Hessian direction, and a backtracking Armijo search runs along
//! the projected path. Dimensions here are small (one per simulator input),
//! so a dense inverse Hessian is fine.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfgsConfig {
    pub max_iter: usize,
    /// Stop when the projected gradient's largest component falls below this.
    pub grad_tol: f64,
    /// Stop when the objective improves by less than this (relative).
    pub f_tol: f64,
}

impl Default for BfgsConfig {
    fn default() -> Self {
        Self {
            max_iter: 200,
            grad_tol: 1e-6,
            f_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

fn project(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for ((v, lo), hi) in x.iter_mut().zip(lower).zip(upper) {
        *v = v.clamp(*lo, *hi);
    }
}

/// Minimise `objective` over the box `[lower, upper]`.
///
/// `objective` returns the value and gradient, or `None` where it cannot be
/// evaluated; such points are rejected by the line search. Returns `None`
/// only if the starting point itself cannot be evaluated.
pub fn minimize_box<F>(
    mut objective: F,
    start: &[f64],
    lower: &[f64],
    upper: &[f64],
    config: &BfgsConfig,
) -> Option<Minimum>
where
    F: FnMut(&[f64]) -> Option<(f64, Vec<f64>)>,
{
    let n = start.len();
    let mut x = start.to_vec();
    project(&mut x, lower, upper);
    let (mut fx, mut g) = objective(&x)?;
    let mut hinv = identity(n);
    let mut iterations = 0;

    while iterations < config.max_iter {
        iterations += 1;

        let pg_norm = (0..n)
            .map(|i| (x[i] - (x[i] - g[i]).clamp(lower[i], upper[i])).abs())
            .fold(0.0, f64::max);
        if pg_norm < config.grad_tol {
            break;
        }

        let active: Vec<bool> = (0..n)
            .map(|i| (x[i] <= lower[i] && g[i] > 0.0) || (x[i] >= upper[i] && g[i] < 0.0))
            .collect();
        let mut d = direction(&hinv, &g, &active);
        let mut slope: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
        if slope >= 0.0 {
            hinv = identity(n);
            d = direction(&hinv, &g, &active);
            slope = d.iter().zip(&g).map(|(a, b)| a * b).sum();
            if slope >= 0.0 {
                break;
            }
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let mut trial: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + step * b).collect();
            project(&mut trial, lower, upper);
            let moved: f64 = trial.iter().zip(&x).zip(&g).map(|((t, a), gi)| (t - a) * gi).sum();
            if let Some((ft, gt)) = objective(&trial) {
                if ft.is_finite() && ft <= fx + 1e-4 * moved.min(0.0) && ft <= fx {
                    accepted = Some((trial, ft, gt));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((x_new, f_new, g_new)) = accepted else {
            break;
        };

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&yv).map(|(a, b)| a * b).sum();
        let s_norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
        let y_norm = yv.iter().map(|v| v * v).sum::<f64>().sqrt();
        if sy > 1e-10 * s_norm * y_norm {
            bfgs_update(&mut hinv, &s, &yv, sy);
        }

        let improvement = fx - f_new;
        x = x_new;
        g = g_new;
        fx = f_new;
        if improvement <= config.f_tol * (1.0 + fx.abs()) {
            break;
        }
    }
    Some(Minimum {
        x,
        value: fx,
        iterations,
    })
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn direction(hinv: &[Vec<f64>], g: &[f64], active: &[bool]) -> Vec<f64> {
    let n = g.len();
    (0..n)
        .map(|i| {
            if active[i] {
                0.0
            } else {
                -(0..n).filter(|&j| !active[j]).map(|j| hinv[i][j] * g[j]).sum::<f64>()
            }
        })
        .collect()
}

fn bfgs_update(hinv: &mut [Vec<f64>], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..n).map(|i| (0..n).map(|j| hinv[i][j] * y[j]).sum()).collect();
    let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
    for i in 0..n {
        for j in 0..n {
            hinv[i][j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> Option<(f64, Vec<f64>)> {
        let (a, b) = (x[0], x[1]);
        let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
        let g = vec![
            -2.0 * (1.0 - a) - 400.0 * a * (b - a * a),
            200.0 * (b - a * a),
        ];
        Some((f, g))
    }

    #[test]
    fn unconstrained_minimum() {
        let r = minimize_box(
            rosenbrock,
            &[-1.2, 1.0],
            &[-5.0, -5.0],
            &[5.0, 5.0],
            &BfgsConfig {
                max_iter: 500,
                f_tol: 0.0,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((r.x[0] - 1.0).abs() < 1e-4 && (r.x[1] - 1.0).abs() < 1e-4, "{r:?}");
    }

    #[test]
    fn active_bound() {
        // Minimum of (x-3)^2 + (y+1)^2 on [0,2] x [0,2] is at (2, 0).
        let f = |x: &[f64]| {
            Some((
                (x[0] - 3.0).powi(2) + (x[1] + 1.0).powi(2),
                vec![2.0 * (x[0] - 3.0), 2.0 * (x[1] + 1.0)],
            ))
        };
        let r = minimize_box(f, &[1.0, 1.0], &[0.0, 0.0], &[2.0, 2.0], &BfgsConfig::default())
            .unwrap();
        assert_eq!(r.x, vec![2.0, 0.0]);
        assert!((r.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn unevaluable_start() {
        let r = minimize_box(|_| None, &[0.0], &[-1.0], &[1.0], &BfgsConfig::default());
        assert!(r.is_none());
    }
}
