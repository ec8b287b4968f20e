//! Modified Bessel function of the first kind.
//!
//! The ascending series `Σ_j (x/2)^{2j+ν} / (j! Γ(j+ν+1))` has only positive
//! terms, so it is summed outward from its largest term in log space. That
//! keeps full relative accuracy for every order and argument and gives the
//! exponentially scaled variant for free.

use super::gamma::ln_gamma;
use crate::error::{domain, Result};

/// `ln I_ν(x)` for `ν ≥ 0`, `x ≥ 0`. Returns `-∞` for `I_ν(0) = 0`.
pub fn ln_bessel_i(order: f64, x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return domain(format!("bessel_i requires finite x >= 0, got {x}"));
    }
    if !(order >= 0.0) || !order.is_finite() {
        return domain(format!("bessel_i requires order >= 0, got {order}"));
    }
    if x == 0.0 {
        return Ok(if order == 0.0 { 0.0 } else { f64::NEG_INFINITY });
    }
    let half = 0.5 * x;
    let q = half * half;
    let ln_half = half.ln();
    // index of the largest term: (j+1)(j+ν+1) ≈ x²/4
    let peak = ((-(order + 2.0) + (order * order + x * x).sqrt()) / 2.0)
        .max(0.0)
        .round();
    let ln_peak =
        (2.0 * peak + order) * ln_half - ln_gamma(peak + 1.0) - ln_gamma(peak + order + 1.0);

    let mut sum = 1.0;
    let mut t = 1.0;
    let mut j = peak;
    loop {
        t *= q / ((j + 1.0) * (j + order + 1.0));
        j += 1.0;
        sum += t;
        if t < 1e-18 * sum {
            break;
        }
    }
    let mut t = 1.0;
    let mut j = peak;
    while j > 0.0 {
        t *= j * (j + order) / q;
        j -= 1.0;
        sum += t;
        if t < 1e-18 * sum {
            break;
        }
    }
    Ok(ln_peak + sum.ln())
}

/// `I_order(x)`. Overflows to `+∞` past `x ≈ 713`; use
/// [`bessel_i_scaled`] there.
pub fn bessel_i(order: u32, x: f64) -> Result<f64> {
    Ok(ln_bessel_i(order as f64, x)?.exp())
}

/// Exponentially scaled `e^{-x} I_order(x)`, finite for every `x ≥ 0`.
pub fn bessel_i_scaled(order: u32, x: f64) -> Result<f64> {
    Ok((ln_bessel_i(order as f64, x)? - x).exp())
}
