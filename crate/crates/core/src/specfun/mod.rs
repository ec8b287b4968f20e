//! Special functions and scalar distributions behind every theoretical
//! false-alarm and detection probability.
//!
//! Everything here is a pure function of its arguments.

mod bessel;
mod beta;
mod gamma;
mod hypergeo;
mod marcum;
mod normal;
pub mod root;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

pub use bessel::{bessel_i, bessel_i_scaled, ln_bessel_i};
pub use beta::reg_inc_beta;
pub use gamma::{ln_gamma, poisson_kernel, reg_gamma_p, reg_gamma_pq, reg_gamma_q, reg_gamma_q_inverse};
pub use hypergeo::{gauss_2f1, gauss_2f1_series, SeriesSum};
pub use marcum::{
    marcum_q, marcum_q_inverse_b, noncentral_chi2_cdf, noncentral_chi2_pdf, noncentral_chi2_sf,
};
pub use normal::{gaussian_q, gaussian_q_inverse};

/// Floating-point overshoot beyond which clamping into `[0, 1]` is reported.
const CLAMP_WARN: f64 = 1e-9;

/// A probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Probability(f64);

impl Probability {
    pub const ZERO: Probability = Probability(0.0);
    pub const ONE: Probability = Probability(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Probability(value))
        } else {
            domain(format!("probability out of [0, 1]: {value}"))
        }
    }

    /// Clamps a computed value into `[0, 1]`, warning when the overshoot
    /// exceeds round-off.
    pub fn clamped(value: f64) -> Self {
        if value.is_nan() {
            log::warn!("probability evaluated to NaN; clamping to 0");
            return Probability(0.0);
        }
        if value < -CLAMP_WARN || value > 1.0 + CLAMP_WARN {
            log::warn!("probability {value:e} outside [0, 1] beyond round-off; clamping");
        }
        Probability(value.clamp(0.0, 1.0))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn complement(self) -> Self {
        Probability(1.0 - self.0)
    }
}

impl TryFrom<f64> for Probability {
    type Error = crate::error::Error;
    fn try_from(v: f64) -> Result<Self> {
        Probability::new(v)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A scaled noncentral chi-square law `scale · χ'²_dof(noncentrality)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareSpec {
    pub dof: u64,
    pub noncentrality: f64,
    pub scale: f64,
}

impl ChiSquareSpec {
    pub fn new(dof: u64, noncentrality: f64, scale: f64) -> Result<Self> {
        if dof == 0 {
            return domain("chi-square needs dof >= 1");
        }
        if !(noncentrality >= 0.0) || !noncentrality.is_finite() {
            return domain(format!("noncentrality must be finite and >= 0, got {noncentrality}"));
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return domain(format!("scale must be positive, got {scale}"));
        }
        Ok(ChiSquareSpec { dof, noncentrality, scale })
    }

    /// Statistic of complex observations with `samples` entries of per-entry
    /// noise variance `sigma2` and total mean energy `mean_energy`:
    /// `Σ|y|² ~ (σ²/2)·χ'²_{2n}(2‖m‖²/σ²)`.
    pub fn complex_energy(samples: u64, sigma2: f64, mean_energy: f64) -> Result<Self> {
        ChiSquareSpec::new(2 * samples, 2.0 * mean_energy / sigma2, 0.5 * sigma2)
    }

    pub fn mean(&self) -> f64 {
        self.scale * (self.dof as f64 + self.noncentrality)
    }

    pub fn variance(&self) -> f64 {
        self.scale * self.scale * 2.0 * (self.dof as f64 + 2.0 * self.noncentrality)
    }
}
