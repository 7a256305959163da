//! Long-time capture by one of two identical absorbing spheres placed
//! symmetrically about the release point, expanded in bispherical
//! coordinates `(mu, eta)` with the spheres on `mu = +-mu1`.

use serde::{Deserialize, Serialize};

use super::AnalyticsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoteResult {
    /// Partial sum of the series.
    pub value: f64,
    /// Number of terms summed.
    pub terms: usize,
    /// Magnitude of the last term added.
    pub last_term: f64,
    /// False when `n_max` was hit before a term dropped below `tol`.
    pub converged: bool,
}

/// Legendre polynomial `P_n(x)` by the three-term recurrence.
pub fn legendre_p(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0) * x * cur - k * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `sinh(x) / sinh(y)` for `0 <= x`, `0 < y` without overflow.
fn sinh_ratio(x: f64, y: f64) -> f64 {
    (x - y).exp() * (-(-2.0 * x).exp_m1()) / (-(-2.0 * y).exp_m1())
}

/// Ultimate capture probability by the sphere at `mu = mu1` for a molecule
/// released at bispherical coordinates `(mu, eta)`, with the second sphere at
/// `mu = -mu1`. Summation stops once the term bound drops below `tol`.
pub fn bispherical_capture(mu: f64, eta: f64, mu1: f64, tol: f64, n_max: usize) -> AsymptoteResult {
    let mu2 = -mu1;
    let prefactor = (2.0 * (mu.cosh() - eta.cos())).sqrt();
    let x = eta.cos();
    let (mut p_prev, mut p_cur) = (1.0, x);
    let mut sum = 0.0;
    let mut last_term = f64::INFINITY;
    for n in 0..n_max {
        let p_n = match n {
            0 => 1.0,
            1 => x,
            _ => {
                let k = (n - 1) as f64;
                let next = ((2.0 * k + 1.0) * x * p_cur - k * p_prev) / (k + 1.0);
                p_prev = p_cur;
                p_cur = next;
                next
            }
        };
        let h = n as f64 + 0.5;
        let envelope = (-h * mu1).exp() * sinh_ratio(h * (mu - mu2), h * (mu1 - mu2));
        let term = prefactor * envelope * p_n;
        sum += term;
        last_term = term.abs();
        if prefactor * envelope < tol {
            return AsymptoteResult { value: sum, terms: n + 1, last_term, converged: true };
        }
    }
    AsymptoteResult { value: sum, terms: n_max, last_term, converged: false }
}

/// Per-receiver asymptotic capture fraction for two spheres of radius `a`
/// centered at distance `d` on opposite sides of the release point.
///
/// The release point sits at `(mu, eta) = (0, pi)`, where the series
/// collapses to `sum_n (-1)^n 2 / (exp((2n+1) mu1) + 1)` with
/// `mu1 = acosh(d / a)`.
pub fn two_rx_asymptote(a: f64, d: f64, tol: f64, n_max: usize) -> Result<AsymptoteResult, AnalyticsError> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(AnalyticsError::InvalidParameter { name: "radius", value: a });
    }
    if !(d > a) {
        return Err(AnalyticsError::InsideReceiver { radius: a, distance: d });
    }
    if !(tol > 0.0) {
        return Err(AnalyticsError::InvalidParameter { name: "tol", value: tol });
    }
    if n_max == 0 {
        return Err(AnalyticsError::InvalidParameter { name: "n_max", value: 0.0 });
    }
    let mu1 = (d / a).acosh();
    let mut sum = 0.0;
    let mut last_term = f64::INFINITY;
    for n in 0..n_max {
        let magnitude = 2.0 / (((2 * n + 1) as f64 * mu1).exp() + 1.0);
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * magnitude;
        last_term = magnitude;
        if magnitude < tol {
            return Ok(AsymptoteResult { value: sum, terms: n + 1, last_term, converged: true });
        }
    }
    Ok(AsymptoteResult { value: sum, terms: n_max, last_term, converged: false })
}
