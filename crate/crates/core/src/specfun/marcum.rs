//! Noncentral chi-square survival function and the generalized Marcum Q.
//!
//! Both are evaluated through the Poisson mixture
//!
//! ```text
//! Pr{χ'²_ν(λ) ≥ x} = Σ_j e^{-λ/2} (λ/2)^j / j! · Q(ν/2 + j, x/2)
//! ```
//!
//! summed outward from the Poisson mode. Neighbouring upper incomplete gamma
//! values are linked by `Q(s+1, y) = Q(s, y) + y^s e^{-y} / Γ(s+1)`, so a
//! single incomplete gamma evaluation at the mode suffices; all other terms
//! come from the recurrence. The series converges for every argument, so no
//! asymptotic switch is used.

use super::gamma::{poisson_kernel, reg_gamma_pq};
use super::root::{brent, expand_upper, Tolerance};
use super::{ChiSquareSpec, Probability};
use crate::error::{domain, Error, Result};

const MAX_TERMS: usize = 50_000_000;

/// Survival function of a unit-scale noncentral chi-square with real `dof`.
pub(crate) fn nc_chi2_sf_unit(dof: f64, noncentrality: f64, x: f64) -> Result<f64> {
    if !(dof > 0.0) {
        return domain(format!("chi-square dof must be positive, got {dof}"));
    }
    if !(noncentrality >= 0.0) || !noncentrality.is_finite() {
        return domain(format!("noncentrality must be >= 0, got {noncentrality}"));
    }
    if x.is_nan() {
        return domain("chi-square argument is NaN");
    }
    if x <= 0.0 {
        return Ok(1.0);
    }
    let s0 = 0.5 * dof;
    let y = 0.5 * x;
    if noncentrality == 0.0 {
        return Ok(reg_gamma_pq(s0, y)?.1);
    }
    let mu = 0.5 * noncentrality;
    let mode = mu.floor();
    let w_mode = poisson_kernel(mode, mu);
    let q_mode = reg_gamma_pq(s0 + mode, y)?.1;
    let d_mode = poisson_kernel(s0 + mode, y);
    let mut sum = w_mode * q_mode;

    // upward: weights fall, Q(s, y) rises towards one
    let (mut w, mut q, mut d, mut j) = (w_mode, q_mode, d_mode, mode);
    let mut converged = false;
    for _ in 0..MAX_TERMS {
        j += 1.0;
        w *= mu / j;
        q = (q + d).min(1.0);
        d *= y / (s0 + j);
        sum += w * q;
        if j > mu {
            // remaining weight mass is bounded by a geometric tail
            let ratio = mu / (j + 1.0);
            let tail = w * ratio / (1.0 - ratio);
            if tail <= 1e-17 * sum || w == 0.0 {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(Error::Convergence(format!(
            "noncentral chi-square series (dof={dof}, λ={noncentrality}, x={x})"
        )));
    }

    // downward: both the weight and Q(s, y) fall
    let (mut w, mut q, mut d, mut j) = (w_mode, q_mode, d_mode, mode);
    while j > 0.0 {
        // d_{s-1} = d_s · s / y
        d *= (s0 + j) / y;
        j -= 1.0;
        w *= (j + 1.0) / mu;
        q = (q - d).max(0.0);
        let term = w * q;
        sum += term;
        if term <= 1e-17 * sum {
            break;
        }
    }
    Ok(sum)
}

/// `Pr{X ≥ x}` for `X ~ scale · χ'²_dof(noncentrality)`.
pub fn noncentral_chi2_sf(spec: &ChiSquareSpec, x: f64) -> Result<Probability> {
    if !(x >= 0.0) {
        return domain(format!("chi-square survival needs x >= 0, got {x}"));
    }
    let v = nc_chi2_sf_unit(spec.dof as f64, spec.noncentrality, x / spec.scale)?;
    Ok(Probability::clamped(v))
}

/// `Pr{X ≤ x}`, computed as the complement of the survival function.
pub fn noncentral_chi2_cdf(spec: &ChiSquareSpec, x: f64) -> Result<Probability> {
    if x <= 0.0 {
        return Ok(Probability::ZERO);
    }
    Ok(noncentral_chi2_sf(spec, x)?.complement())
}

/// Density of `scale · χ'²_dof(noncentrality)` at `x`.
pub fn noncentral_chi2_pdf(spec: &ChiSquareSpec, x: f64) -> Result<f64> {
    if x < 0.0 {
        return Ok(0.0);
    }
    let nu = spec.dof as f64;
    let lam = spec.noncentrality;
    let u = x / spec.scale;
    if u == 0.0 {
        return Ok(match spec.dof {
            1 => f64::INFINITY,
            2 => (-0.5 * lam).exp() / (2.0 * spec.scale),
            _ => 0.0,
        });
    }
    let ln_unit = if lam == 0.0 {
        let s = 0.5 * nu;
        (s - 1.0) * u.ln() - 0.5 * u - s * std::f64::consts::LN_2 - super::gamma::ln_gamma(s)
    } else {
        let order = 0.5 * nu - 1.0;
        let z = (lam * u).sqrt();
        let ln_i = if spec.dof == 1 {
            // I_{-1/2}(z) = √(2/(πz)) cosh z
            0.5 * (2.0 / (std::f64::consts::PI * z)).ln() + z + (0.5 * (1.0 + (-2.0 * z).exp())).ln()
        } else {
            super::bessel::ln_bessel_i(order, z)?
        };
        -std::f64::consts::LN_2 - 0.5 * (u + lam) + 0.5 * order * (u / lam).ln() + ln_i
    };
    Ok((ln_unit - spec.scale.ln()).exp())
}

fn check_order(k: f64) -> Result<()> {
    let twice = 2.0 * k;
    if !(k >= 0.5) || twice.fract() != 0.0 {
        return domain(format!(
            "Marcum Q order must be a positive integer or half-integer, got {k}"
        ));
    }
    Ok(())
}

/// Generalized Marcum Q-function
/// `Q_k(a, b) = a^{1-k} ∫_b^∞ t^k e^{-(t²+a²)/2} I_{k-1}(a t) dt`.
pub fn marcum_q(k: f64, a: f64, b: f64) -> Result<Probability> {
    check_order(k)?;
    if !(a >= 0.0) || !(b >= 0.0) {
        return domain(format!("Marcum Q needs a, b >= 0, got a={a}, b={b}"));
    }
    let v = nc_chi2_sf_unit(2.0 * k, a * a, b * b)?;
    Ok(Probability::clamped(v))
}

/// Solves `Q_k(a, b) = p` for `b`.
pub fn marcum_q_inverse_b(k: f64, a: f64, p: Probability) -> Result<f64> {
    check_order(k)?;
    if !(a >= 0.0) {
        return domain(format!("Marcum Q needs a >= 0, got {a}"));
    }
    let p = p.get();
    if p <= 0.0 {
        return domain("Marcum Q inverse needs p > 0");
    }
    if p == 1.0 {
        return Ok(0.0);
    }
    let f = |b: f64| -> Result<f64> { Ok(nc_chi2_sf_unit(2.0 * k, a * a, b * b)? - p) };
    let hi = expand_upper(a + (2.0 * k).sqrt() + 8.0, |b| Ok(f(b)? < 0.0))?;
    let tol = Tolerance {
        f_abs: 1e-13 * p.min(1.0 - p),
        ..Tolerance::default()
    };
    let b = brent(f, 0.0, hi, tol)?;
    let resid = f(b)?;
    if resid.abs() > 1e-10 * p {
        return Err(Error::Convergence(format!(
            "Marcum Q inverse residual {resid:e} at k={k}, a={a}, p={p}"
        )));
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_threshold_is_one() {
        for &k in &[0.5, 1.0, 4.0, 100.0] {
            for &a in &[0.0, 0.3, 5.0] {
                assert_eq!(marcum_q(k, a, 0.0).unwrap().get(), 1.0);
            }
        }
    }

    #[test]
    fn first_order_central_is_rayleigh_tail() {
        for &b in &[0.1, 1.0, 2.0, 4.5] {
            let q = marcum_q(1.0, 0.0, b).unwrap().get();
            let want = (-0.5 * b * b).exp();
            assert!((q - want).abs() < 1e-15 * want.max(1e-300) + 1e-16);
        }
    }

    #[test]
    fn first_order_closed_form_check() {
        // Q_1(a, b) + Q_1(b, a) = 1 + e^{-(a²+b²)/2} I_0(ab)
        for &(a, b) in &[(0.5, 1.2), (2.0, 2.5), (3.0, 1.0), (6.0, 7.5)] {
            let lhs = marcum_q(1.0, a, b).unwrap().get() + marcum_q(1.0, b, a).unwrap().get();
            let rhs = 1.0
                + super::super::bessel::bessel_i_scaled(0, a * b).unwrap()
                    * (-(a - b) * (a - b) / 2.0).exp();
            assert!((lhs - rhs).abs() < 1e-13, "a={a} b={b}");
        }
    }

    #[test]
    fn half_integer_order_accepted() {
        // Q_{1/2}(0, b) = 2 Q(b) (Gaussian tail)
        let b = 1.3;
        let q = marcum_q(0.5, 0.0, b).unwrap().get();
        let want = libm::erfc(b / std::f64::consts::SQRT_2);
        assert!((q - want).abs() < 1e-14);
        assert!(marcum_q(0.7, 0.0, 1.0).is_err());
    }

    #[test]
    fn inverse_examples() {
        let b = marcum_q_inverse_b(1.0, 0.0, Probability::new((-2f64).exp()).unwrap()).unwrap();
        assert!((b - 2.0).abs() < 1e-9);
        assert_eq!(marcum_q_inverse_b(3.0, 1.0, Probability::ONE).unwrap(), 0.0);
        let b = marcum_q_inverse_b(3.0, 1.0, Probability::new(0.1).unwrap()).unwrap();
        assert!((marcum_q(3.0, 1.0, b).unwrap().get() - 0.1).abs() < 1e-9);
    }

    #[test]
    fn huge_dof_median() {
        // χ²_ν median ≈ ν(1 - 2/(9ν))³
        let nu: f64 = 8.0e4;
        let med = nu * (1.0 - 2.0 / (9.0 * nu)).powi(3);
        let sf = nc_chi2_sf_unit(nu, 0.0, med).unwrap();
        assert!((sf - 0.5).abs() < 1e-4);
        // small noncentrality shifts mass slightly upward
        let sf2 = nc_chi2_sf_unit(nu, 3.0, med).unwrap();
        assert!(sf2 > sf && sf2 - sf < 0.01);
    }

    #[test]
    fn large_noncentrality_mean() {
        // mean ν + λ; sf at the mean is a bit below one half
        let (nu, lam) = (40.0, 1.0e6);
        let sf = nc_chi2_sf_unit(nu, lam, nu + lam).unwrap();
        assert!((sf - 0.5).abs() < 0.01, "sf={sf}");
    }

    #[test]
    fn domain_errors() {
        assert!(marcum_q(1.0, -1.0, 1.0).is_err());
        assert!(marcum_q(1.0, 1.0, -1.0).is_err());
        assert!(marcum_q(0.0, 1.0, 1.0).is_err());
    }
}
