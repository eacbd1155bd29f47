//! Closed-form proximal operators used by the primal-dual iterations.

/// `prox` of `gamma * (indicator{w >= 0} + 2 w^T z)`: `max(0, y - 2 gamma z)`.
pub fn prox_weighted_l1_nonneg(y: &[f64], z: &[f64], gamma: f64) -> Vec<f64> {
    let mut out = y.to_vec();
    prox_weighted_l1_nonneg_in_place(&mut out, z, gamma);
    out
}

pub fn prox_weighted_l1_nonneg_in_place(y: &mut [f64], z: &[f64], gamma: f64) {
    debug_assert_eq!(y.len(), z.len());
    let g2 = 2.0 * gamma;
    for (v, zi) in y.iter_mut().zip(z) {
        *v = (*v - g2 * zi).max(0.0);
    }
}

/// `prox` of `lambda * f` for `f(d) = -alpha sum log d_i`, one coordinate:
/// `(y + sqrt(y^2 + 4 alpha lambda)) / 2`.
///
/// Negative `y` uses the equivalent `2 alpha lambda / (sqrt(...) - y)`.
#[inline]
pub fn prox_log_barrier_scalar(y: f64, alpha: f64, lambda: f64) -> f64 {
    let c = 4.0 * alpha * lambda;
    let r = (y * y + c).sqrt();
    if y < 0.0 {
        c / (2.0 * (r - y))
    } else {
        (y + r) / 2.0
    }
}

pub fn prox_log_barrier(y: &[f64], alpha: f64, lambda: f64) -> Vec<f64> {
    y.iter().map(|&v| prox_log_barrier_scalar(v, alpha, lambda)).collect()
}

/// Dual prox of the log barrier, `(y - sqrt(y^2 + 4 alpha gamma)) / 2`, one coordinate.
///
/// For positive `y` the algebraically equal `-2 alpha gamma / (y + sqrt(...))`
/// is used; the direct form cancels catastrophically there.
#[inline]
pub fn prox_conjugate_log_barrier_scalar(y: f64, alpha: f64, gamma: f64) -> f64 {
    let c = 4.0 * alpha * gamma;
    let r = (y * y + c).sqrt();
    if y > 0.0 {
        -c / (2.0 * (y + r))
    } else {
        (y - r) / 2.0
    }
}

/// `prox` of `gamma f*` where `f(d) = -alpha sum log d_i`.
///
/// By Moreau's identity this equals `y - gamma prox_{f/gamma}(y/gamma)`.
pub fn prox_conjugate_log_barrier(ybar: &[f64], alpha: f64, gamma: f64) -> Vec<f64> {
    ybar.iter()
        .map(|&v| prox_conjugate_log_barrier_scalar(v, alpha, gamma))
        .collect()
}
