use nalgebra::{Cholesky, DMatrix, Dyn};

/// Jitter schedule: relative diagonal inflation tried in order.
pub(crate) const JITTER_START: f64 = 1e-10;
pub(crate) const JITTER_MAX: f64 = 1e-6;

/// Cholesky factor of `a + tau * mean(diag a) * I`, escalating `tau` by ten
/// from [`JITTER_START`] to [`JITTER_MAX`] until the factorisation succeeds.
/// Returns the factor and the absolute jitter added to the diagonal.
pub(crate) fn cholesky_with_jitter(a: &DMatrix<f64>) -> Option<(Cholesky<f64, Dyn>, f64)> {
    let n = a.nrows();
    let scale = if n == 0 { 1.0 } else { a.trace() / n as f64 };
    let scale = if scale > 0.0 && scale.is_finite() { scale } else { 1.0 };
    let mut tau = JITTER_START;
    while tau <= JITTER_MAX * (1.0 + 1e-9) {
        if let Some(c) = cholesky_fixed(a, tau * scale) {
            return Some((c, tau * scale));
        }
        tau *= 10.0;
    }
    None
}

/// Cholesky factor of `a + jitter * I`.
pub(crate) fn cholesky_fixed(a: &DMatrix<f64>, jitter: f64) -> Option<Cholesky<f64, Dyn>> {
    let mut m = a.clone();
    for i in 0..m.nrows() {
        m[(i, i)] += jitter;
    }
    Cholesky::new(m)
}

/// `log |A|` from a Cholesky factor.
pub(crate) fn log_det(c: &Cholesky<f64, Dyn>) -> f64 {
    2.0 * c.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>()
}
