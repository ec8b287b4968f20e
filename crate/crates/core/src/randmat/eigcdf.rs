//! Distribution of the scaled largest eigenvalue `T0 = N_b γ₁ / Σγ_i` of a
//! central complex Wishart matrix.
//!
//! The approximating density has CDF
//! `F(y) = c·(B(y) − B(1))` with `B(x) = x^k ₂F₁(k, 1+k−m/2; k+1; x/L)` and
//! `L = N_b ϖ`. Up to the constant `c` this is the incomplete beta
//! `I_{x/L}(k, m/2 − k)`, which is what gets evaluated: the hypergeometric
//! series alternates wildly once `m` is large, while the incomplete beta
//! continued fraction stays accurate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{gram, hermitian_eigenvalues, standard_complex_gaussian, ComplexMatrix};
use crate::error::{domain, Error, Result};
use crate::specfun::root::{brent, Tolerance};
use crate::specfun::{gauss_2f1, ln_gamma, reg_inc_beta, Probability};

/// Shape constants of the largest-eigenvalue-ratio law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigCdfParams {
    /// Real degrees of freedom, `2 M N_b`.
    pub m: u64,
    pub k: f64,
    pub varpi: f64,
    pub n_b: usize,
}

impl EigCdfParams {
    pub fn new(m: u64, k: f64, varpi: f64, n_b: usize) -> Result<Self> {
        if m == 0 || m % 2 != 0 {
            return domain(format!("m must be a positive even integer, got {m}"));
        }
        if !(k > 0.0) || !(varpi > 0.0) || !k.is_finite() || !varpi.is_finite() {
            return domain(format!("k and varpi must be positive, got k={k}, varpi={varpi}"));
        }
        if !(m as f64 > 2.0 * k) {
            return domain(format!("need m > 2k, got m={m}, k={k}"));
        }
        if n_b == 0 {
            return domain("n_b must be >= 1");
        }
        Ok(EigCdfParams { m, k, varpi, n_b })
    }

    /// Support end `N_b ϖ`.
    pub fn scale(&self) -> f64 {
        self.n_b as f64 * self.varpi
    }

    fn beta_shapes(&self) -> (f64, f64) {
        (self.k, 0.5 * self.m as f64 - self.k)
    }
}

fn beta_cdf(a: f64, b: f64, z: f64) -> Result<f64> {
    if z <= 0.0 {
        Ok(0.0)
    } else if z >= 1.0 {
        Ok(1.0)
    } else {
        reg_inc_beta(a, b, z)
    }
}

/// `F_{T0}(y)` for `y ≥ 1`.
pub fn scaled_max_eig_cdf(params: &EigCdfParams, y: f64) -> Result<Probability> {
    if !(y >= 1.0) {
        return domain(format!("T0 lives on [1, N_b]; got y={y}"));
    }
    let (a, b) = params.beta_shapes();
    let l = params.scale();
    let hi = beta_cdf(a, b, y / l)?;
    let lo = beta_cdf(a, b, 1.0 / l)?;
    Ok(Probability::clamped(hi - lo))
}

/// The same CDF evaluated literally as `c·(B(y) − B(1))` through the Gauss
/// hypergeometric series. Only usable while `y < N_b ϖ` and for moderate
/// `m`; kept as a cross-check of [`scaled_max_eig_cdf`].
pub fn scaled_max_eig_cdf_closed_form(params: &EigCdfParams, y: f64) -> Result<f64> {
    if !(y >= 1.0) {
        return domain(format!("T0 lives on [1, N_b]; got y={y}"));
    }
    let l = params.scale();
    let k = params.k;
    let s = 0.5 * params.m as f64;
    let ln_c = ln_gamma(s) - k * l.ln() - k.ln() - ln_gamma(s - k) - ln_gamma(k);
    let big_b = |x: f64| -> Result<f64> { Ok(gauss_2f1(k, 1.0 + k - s, k + 1.0, x / l)? * x.powf(k)) };
    Ok(ln_c.exp() * (big_b(y)? - big_b(1.0)?))
}

/// Smallest `y` with `F_{T0}(y) ≥ p`. Probabilities above the mass reachable
/// inside the support map to its upper end.
pub fn scaled_max_eig_quantile(params: &EigCdfParams, p: Probability) -> Result<f64> {
    let p = p.get();
    if p <= 0.0 {
        return Ok(1.0);
    }
    let hi = params.scale().max(1.0);
    if scaled_max_eig_cdf(params, hi)?.get() <= p {
        return Ok(hi);
    }
    let tol = Tolerance { x_abs: 1e-13, x_rel: 1e-13, f_abs: 1e-15, ..Tolerance::default() };
    brent(|y| Ok(scaled_max_eig_cdf(params, y)?.get() - p), 1.0, hi, tol)
}

/// `N_b γ₁ / Tr W` for a Hermitian positive semidefinite `W`.
pub fn scaled_max_eig_ratio(w: &ComplexMatrix) -> f64 {
    let eig = hermitian_eigenvalues(w);
    let tr: f64 = eig.iter().sum();
    w.nrows() as f64 * eig[0] / tr
}

/// Fits `k` and `ϖ` so that the model's mean and variance match those of
/// `trials` simulated draws of `T0` for `W = XXᴴ`, `X` an `n_b × M` matrix
/// of i.i.d. `CN(0, 1)` entries.
///
/// The trials are run in parallel on independent streams derived from one
/// seed taken from `rng`, so the fit depends only on the caller's RNG.
pub fn calibrate_eig_cdf_params<R: Rng + ?Sized>(
    samples: usize,
    n_b: usize,
    trials: usize,
    rng: &mut R,
) -> Result<EigCdfParams> {
    if n_b < 2 {
        return Err(Error::Degenerate(format!(
            "with n_b = {n_b} the eigenvalue ratio is identically 1"
        )));
    }
    if trials < 1000 {
        return domain(format!("calibration needs at least 1000 trials, got {trials}"));
    }
    if samples < n_b {
        return domain(format!("need M >= n_b, got M={samples}, n_b={n_b}"));
    }
    let base: u64 = rng.random();
    let draws: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut r = ChaCha8Rng::seed_from_u64(base);
            r.set_stream(i as u64);
            let x = standard_complex_gaussian(n_b, samples, &mut r);
            scaled_max_eig_ratio(&gram(&x))
        })
        .collect();
    fit_moments(samples, n_b, &draws)
}

/// Moment fit from an explicit sample of `T0`.
pub fn fit_moments(samples: usize, n_b: usize, draws: &[f64]) -> Result<EigCdfParams> {
    let n = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / n;
    let var = draws.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let m = 2 * (samples * n_b) as u64;
    let s = 0.5 * m as f64;
    // L·Z with Z ~ Beta(k, s−k): mean L k/s, variance L² k(s−k)/(s²(s+1))
    let k = s / (1.0 + var * (s + 1.0) / (mean * mean));
    let l = mean * s / k;
    let varpi = l / n_b as f64;
    if !(k > 0.0 && k < s && varpi > 0.0 && k.is_finite() && varpi.is_finite()) {
        return Err(Error::Convergence(format!(
            "moment fit has no admissible solution (mean={mean}, var={var})"
        )));
    }
    EigCdfParams::new(m, k, varpi, n_b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha8Rng;

    fn params() -> EigCdfParams {
        EigCdfParams::new(12, 2.5, 1.4, 3).unwrap()
    }

    #[test]
    fn zero_at_lower_end() {
        assert_eq!(scaled_max_eig_cdf(&params(), 1.0).unwrap().get(), 0.0);
        assert!(scaled_max_eig_cdf(&params(), 0.9).is_err());
    }

    #[test]
    fn closed_form_agrees_for_small_m() {
        let p = params();
        for &y in &[1.05, 1.3, 1.8, 2.5, 4.0] {
            let a = scaled_max_eig_cdf(&p, y).unwrap().get();
            let b = scaled_max_eig_cdf_closed_form(&p, y).unwrap();
            assert!((a - b).abs() < 1e-10, "y={y}: {a} vs {b}");
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        let p = params();
        for &q in &[0.01, 0.3, 0.6, 0.8] {
            let y = scaled_max_eig_quantile(&p, Probability::new(q).unwrap()).unwrap();
            let back = scaled_max_eig_cdf(&p, y).unwrap().get();
            assert!((back - q).abs() < 1e-9);
        }
    }

    #[test]
    fn single_antenna_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            calibrate_eig_cdf_params(64, 1, 2000, &mut rng),
            Err(Error::Degenerate(_))
        ));
        assert!(calibrate_eig_cdf_params(64, 2, 10, &mut rng).is_err());
    }

    #[test]
    fn calibration_is_deterministic() {
        let a = calibrate_eig_cdf_params(32, 2, 1000, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = calibrate_eig_cdf_params(32, 2, 1000, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ratio_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let x = standard_complex_gaussian(4, 8, &mut rng);
            let t = scaled_max_eig_ratio(&gram(&x));
            assert!((1.0..=4.0 + 1e-12).contains(&t));
        }
    }
}
