//! Eavesdropper detectors: energy detection, the coherent matched filter and
//! two generalized likelihood ratio tests, with their thresholds and
//! theoretical operating characteristics.
//!
//! Statistics take the raw observation matrix `Y` so they can be applied to
//! arbitrary residuals; [`run_detector`] wraps them for one observation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Hypothesis, ObservationMatrix};
use crate::randmat::{
    effective_correlation, frobenius_sq, hermitian_eigenvalues, inner_re, scaled_max_eig_cdf,
    scaled_max_eig_quantile, ComplexMatrix, EigCdfParams,
};
use crate::specfun::{
    gaussian_q, gaussian_q_inverse, marcum_q, marcum_q_inverse_b, noncentral_chi2_sf,
    reg_gamma_q, reg_gamma_q_inverse, ChiSquareSpec, Probability,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DetectorKind {
    ED,
    MF,
    GLRT1,
    GLRT2,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 4] =
        [DetectorKind::ED, DetectorKind::MF, DetectorKind::GLRT1, DetectorKind::GLRT2];

    pub fn name(self) -> &'static str {
        match self {
            DetectorKind::ED => "ED",
            DetectorKind::MF => "MF",
            DetectorKind::GLRT1 => "GLRT1",
            DetectorKind::GLRT2 => "GLRT2",
        }
    }
}

impl std::fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for DetectorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "ED" => Ok(DetectorKind::ED),
            "MF" => Ok(DetectorKind::MF),
            "GLRT1" => Ok(DetectorKind::GLRT1),
            "GLRT2" => Ok(DetectorKind::GLRT2),
            _ => Err(Error::Config(format!("unknown detector {s:?}"))),
        }
    }
}

/// Outcome of one detector on one observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorReport {
    pub kind: DetectorKind,
    pub statistic: f64,
    pub threshold: f64,
    pub decision: Hypothesis,
    pub theoretical_pfa: Option<Probability>,
    pub theoretical_pd: Option<Probability>,
}

/// Ties go to `H1`.
pub fn decide(statistic: f64, threshold: f64) -> Hypothesis {
    if statistic >= threshold {
        Hypothesis::H1
    } else {
        Hypothesis::H0
    }
}

fn same_shape(a: &ComplexMatrix, b: &ComplexMatrix, what: &str) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(format!(
            "{what}: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

fn sample_count(m: &ComplexMatrix) -> u64 {
    (m.nrows() * m.ncols()) as u64
}

/// Gaussian log-likelihood of `Y ~ CN(mean, σ²I)`.
pub fn log_likelihood(y: &ComplexMatrix, mean: &ComplexMatrix, sigma2: f64) -> Result<f64> {
    same_shape(y, mean, "log-likelihood")?;
    let n = sample_count(y) as f64;
    Ok(-n * (std::f64::consts::PI * sigma2).ln() - frobenius_sq(&(y - mean)) / sigma2)
}

// ---------------------------------------------------------------- energy

/// `Tr{YᴴY}`.
pub fn ed_statistic(y: &ComplexMatrix) -> f64 {
    frobenius_sq(y)
}

/// Noncentrality `2‖M‖²_F / σ²` of the energy statistic around mean `M`.
pub fn ed_noncentrality(mean: &ComplexMatrix, sigma2: f64) -> f64 {
    2.0 * frobenius_sq(mean) / sigma2
}

/// Energy threshold with false-alarm probability `pfa` when Alice's leakage
/// `m_a` is the only deterministic component.
pub fn ed_calibrate(pfa: Probability, m_a: &ComplexMatrix, sigma2: f64) -> Result<f64> {
    let k = sample_count(m_a) as f64;
    let a = ed_noncentrality(m_a, sigma2).sqrt();
    let b = marcum_q_inverse_b(k, a, pfa)?;
    Ok(0.5 * sigma2 * b * b)
}

fn ed_tail(eta: f64, mean: &ComplexMatrix, sigma2: f64) -> Result<Probability> {
    if !(eta >= 0.0) {
        return Err(Error::Domain(format!("energy threshold must be >= 0, got {eta}")));
    }
    let k = sample_count(mean) as f64;
    marcum_q(k, ed_noncentrality(mean, sigma2).sqrt(), (2.0 * eta / sigma2).sqrt())
}

pub fn ed_theoretical_pfa(eta: f64, m_a: &ComplexMatrix, sigma2: f64) -> Result<Probability> {
    ed_tail(eta, m_a, sigma2)
}

pub fn ed_theoretical_pd(
    eta: f64,
    m_a: &ComplexMatrix,
    m_e: &ComplexMatrix,
    sigma2: f64,
) -> Result<Probability> {
    same_shape(m_a, m_e, "ED means")?;
    ed_tail(eta, &(m_e + m_a), sigma2)
}

// ---------------------------------------------------------- matched filter

/// `Re Tr{M_Eᴴ Y}`.
pub fn mf_statistic(y: &ComplexMatrix, m_e: &ComplexMatrix) -> Result<f64> {
    same_shape(y, m_e, "matched filter")?;
    Ok(inner_re(m_e, y))
}

fn mf_spread(m_e: &ComplexMatrix, sigma2: f64) -> Result<f64> {
    let energy = frobenius_sq(m_e);
    if !(energy > 0.0) {
        return Err(Error::Degenerate("matched filter needs a nonzero Eve mean".into()));
    }
    Ok((0.5 * sigma2 * energy).sqrt())
}

/// `ε = √(σ²/2·‖M_E‖²)·Q⁻¹(pfa) + Re Tr{M_Eᴴ M_A}`.
pub fn mf_calibrate(
    pfa: Probability,
    m_e: &ComplexMatrix,
    m_a: &ComplexMatrix,
    sigma2: f64,
) -> Result<f64> {
    same_shape(m_a, m_e, "MF means")?;
    let spread = mf_spread(m_e, sigma2)?;
    let z = match pfa.get() {
        p if p == 0.0 => f64::INFINITY,
        p if p == 1.0 => f64::NEG_INFINITY,
        _ => gaussian_q_inverse(pfa)?,
    };
    Ok(spread * z + inner_re(m_e, m_a))
}

pub fn mf_theoretical_pfa(
    epsilon: f64,
    m_e: &ComplexMatrix,
    m_a: &ComplexMatrix,
    sigma2: f64,
) -> Result<Probability> {
    same_shape(m_a, m_e, "MF means")?;
    let spread = mf_spread(m_e, sigma2)?;
    Ok(gaussian_q((epsilon - inner_re(m_e, m_a)) / spread))
}

/// `Q((ε − Re Tr{M_Eᴴ M_1}) / √(σ²/2·‖M_E‖²))`.
pub fn mf_theoretical_pd(
    epsilon: f64,
    m_e: &ComplexMatrix,
    m_a: &ComplexMatrix,
    sigma2: f64,
) -> Result<Probability> {
    same_shape(m_a, m_e, "MF means")?;
    let spread = mf_spread(m_e, sigma2)?;
    let m_1 = m_e + m_a;
    Ok(gaussian_q((epsilon - inner_re(m_e, &m_1)) / spread))
}

// ------------------------------------------------------------------ GLRT 1

/// `‖Y − M_A‖² / ‖Y − M_1‖²`, the ratio of the noise-variance estimates
/// under the two hypotheses.
pub fn glrt1_statistic(y: &ComplexMatrix, m_a: &ComplexMatrix, m_e: &ComplexMatrix) -> Result<f64> {
    same_shape(y, m_a, "GLRT1")?;
    same_shape(y, m_e, "GLRT1")?;
    let x = y - m_a;
    let num = frobenius_sq(&x);
    let den = frobenius_sq(&(&x - m_e));
    // zero up to round-off of the subtraction
    if !(den > 1e-28 * (num + frobenius_sq(m_e))) {
        return Err(Error::Degenerate("GLRT1 residual under H1 vanishes".into()));
    }
    Ok(num / den)
}

/// Noise-variance estimate `‖Y − mean‖² / (M N_b)`.
pub fn noise_variance_mle(y: &ComplexMatrix, mean: &ComplexMatrix) -> Result<f64> {
    same_shape(y, mean, "noise estimate")?;
    Ok(frobenius_sq(&(y - mean)) / sample_count(y) as f64)
}

/// Smallest eigenvalue of `Ψ = I + M^{-1} M_E M_Eᴴ`.
pub fn psi_min(m_e: &ComplexMatrix) -> f64 {
    *hermitian_eigenvalues(&effective_correlation(m_e)).last().expect("nonempty")
}

fn check_eig_params(m_e: &ComplexMatrix, params: &EigCdfParams) -> Result<()> {
    let m = 2 * sample_count(m_e);
    if params.m != m || params.n_b != m_e.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "eigen-ratio law fitted for m={}, n_b={} but observation has m={m}, n_b={}",
            params.m,
            params.n_b,
            m_e.nrows()
        )));
    }
    Ok(())
}

/// Upper bound `1 − F_{T0}(ψ_min η)` on the false-alarm probability; equal
/// to one when `ψ_min η` falls below the support of `T0`.
pub fn glrt1_pfa_bound(eta: f64, m_e: &ComplexMatrix, params: &EigCdfParams) -> Result<Probability> {
    check_eig_params(m_e, params)?;
    let arg = psi_min(m_e) * eta;
    if arg < 1.0 {
        return Ok(Probability::ONE);
    }
    Ok(scaled_max_eig_cdf(params, arg)?.complement())
}

/// Lower bound `F_{T0}(ς_min / η)` on the detection probability; zero when
/// the argument falls below the support of `T0`.
pub fn glrt1_pd_bound(eta: f64, m_e: &ComplexMatrix, params: &EigCdfParams) -> Result<Probability> {
    if !(eta > 0.0) {
        return Err(Error::Domain(format!("GLRT1 threshold must be positive, got {eta}")));
    }
    check_eig_params(m_e, params)?;
    let arg = psi_min(m_e) / eta;
    if arg < 1.0 {
        return Ok(Probability::ZERO);
    }
    scaled_max_eig_cdf(params, arg)
}

/// Threshold whose false-alarm bound equals `pfa`.
pub fn glrt1_calibrate(pfa: Probability, m_e: &ComplexMatrix, params: &EigCdfParams) -> Result<f64> {
    check_eig_params(m_e, params)?;
    let y = scaled_max_eig_quantile(params, pfa.complement())?;
    Ok(y / psi_min(m_e))
}

// ------------------------------------------------------------------ GLRT 2

/// `‖Y − M_A‖² / Tr{M_Aᴴ M_A}`.
pub fn glrt2_statistic(y: &ComplexMatrix, m_a: &ComplexMatrix) -> Result<f64> {
    same_shape(y, m_a, "GLRT2")?;
    let den = frobenius_sq(m_a);
    if !(den > 0.0) {
        return Err(Error::Config(
            "GLRT2 normalizes by Alice's leakage energy, which is zero".into(),
        ));
    }
    Ok(frobenius_sq(&(y - m_a)) / den)
}

/// Residual energy `‖Y − M̂'_E D − M_A‖²` left by the unconstrained estimate
/// `M̂'_E = (Y − M_A) Dᴴ`, `D = diag(e^{jωn})`. Since `D` is unitary this is
/// zero up to round-off for every `Y`, which is why the normalization by
/// Alice's leakage energy in [`glrt2_statistic`] is taken as given rather
/// than derived.
pub fn glrt2_mle_residual(y: &ComplexMatrix, m_a: &ComplexMatrix, omega: f64) -> Result<f64> {
    same_shape(y, m_a, "GLRT2")?;
    let x = y - m_a;
    let mut est = x.clone();
    for (n, mut col) in est.column_iter_mut().enumerate() {
        col *= num_complex::Complex64::from_polar(1.0, -omega * n as f64);
    }
    for (n, mut col) in est.column_iter_mut().enumerate() {
        col *= num_complex::Complex64::from_polar(1.0, omega * n as f64);
    }
    Ok(frobenius_sq(&(x - est)))
}

fn glrt2_energy(m_a: &ComplexMatrix) -> Result<f64> {
    let e = frobenius_sq(m_a);
    if !(e > 0.0) {
        return Err(Error::Config(
            "GLRT2 normalizes by Alice's leakage energy, which is zero".into(),
        ));
    }
    Ok(e)
}

/// Threshold `τ` on [`glrt2_statistic`] with `1 − P(MN_b, τ‖M_A‖²/σ²) = pfa`.
pub fn glrt2_calibrate(pfa: Probability, m_a: &ComplexMatrix, sigma2: f64) -> Result<f64> {
    let energy = glrt2_energy(m_a)?;
    if pfa.get() == 0.0 {
        return Err(Error::Domain("GLRT2 threshold for pfa = 0 is infinite".into()));
    }
    let x = reg_gamma_q_inverse(sample_count(m_a) as f64, pfa.get())?;
    Ok(x * sigma2 / energy)
}

pub fn glrt2_theoretical_pfa(tau: f64, m_a: &ComplexMatrix, sigma2: f64) -> Result<Probability> {
    let energy = glrt2_energy(m_a)?;
    Ok(Probability::clamped(reg_gamma_q(sample_count(m_a) as f64, (tau * energy / sigma2).max(0.0))?))
}

/// Under `H1` the residual `Y − M_A` has mean `M_E`, so its energy is a
/// scaled noncentral chi-square with `2MN_b` degrees of freedom.
pub fn glrt2_theoretical_pd(
    tau: f64,
    m_a: &ComplexMatrix,
    m_e: &ComplexMatrix,
    sigma2: f64,
) -> Result<Probability> {
    same_shape(m_a, m_e, "GLRT2 means")?;
    let energy = glrt2_energy(m_a)?;
    let spec = ChiSquareSpec::complex_energy(sample_count(m_a), sigma2, frobenius_sq(m_e))?;
    noncentral_chi2_sf(&spec, (tau * energy).max(0.0))
}

pub fn glrt2_calibrate_and_curves(
    pfa: Probability,
    m_a: &ComplexMatrix,
    m_e: &ComplexMatrix,
    sigma2: f64,
) -> Result<(f64, Probability)> {
    let tau = glrt2_calibrate(pfa, m_a, sigma2)?;
    Ok((tau, glrt2_theoretical_pd(tau, m_a, m_e, sigma2)?))
}

// ------------------------------------------------------------- dispatch

/// What a detector is allowed to know besides the observation.
#[derive(Debug, Clone, Default)]
pub struct SideInfo {
    pub sigma_b2: Option<f64>,
    pub m_a: Option<ComplexMatrix>,
    pub m_e: Option<ComplexMatrix>,
    pub omega: Option<f64>,
    /// Fitted eigen-ratio law, needed for GLRT1 thresholds.
    pub eig_params: Option<EigCdfParams>,
}

impl SideInfo {
    /// Everything a detector of `kind` is entitled to, taken from a
    /// simulated observation.
    pub fn entitled(
        kind: DetectorKind,
        obs: &ObservationMatrix,
        true_m_e: &ComplexMatrix,
        sigma_b2: f64,
        omega: f64,
        eig_params: Option<EigCdfParams>,
    ) -> SideInfo {
        let m_a = Some(obs.m_a.clone());
        match kind {
            DetectorKind::ED => SideInfo { sigma_b2: Some(sigma_b2), m_a, ..SideInfo::default() },
            DetectorKind::MF => SideInfo {
                sigma_b2: Some(sigma_b2),
                m_a,
                m_e: Some(true_m_e.clone()),
                omega: Some(omega),
                eig_params,
            },
            DetectorKind::GLRT1 => {
                SideInfo { m_a, m_e: Some(true_m_e.clone()), eig_params, ..SideInfo::default() }
            }
            // σ² is used only to place the constant-false-alarm threshold
            DetectorKind::GLRT2 => SideInfo {
                sigma_b2: Some(sigma_b2),
                m_a,
                omega: Some(omega),
                ..SideInfo::default()
            },
        }
    }
}

fn need<'a, T>(v: &'a Option<T>, kind: DetectorKind, what: &str) -> Result<&'a T> {
    v.as_ref()
        .ok_or_else(|| Error::MissingSideInfo(format!("{kind} needs {what}")))
}

/// Calibrates `kind` at `pfa` and applies it to `obs`.
pub fn run_detector(
    kind: DetectorKind,
    obs: &ObservationMatrix,
    side: &SideInfo,
    pfa: Probability,
) -> Result<DetectorReport> {
    let y = &obs.y;
    let (statistic, threshold, pfa_th, pd_th) = match kind {
        DetectorKind::ED => {
            let s2 = *need(&side.sigma_b2, kind, "sigma_b2")?;
            let m_a = need(&side.m_a, kind, "M_A")?;
            let eta = ed_calibrate(pfa, m_a, s2)?;
            let pd = match &side.m_e {
                Some(m_e) => Some(ed_theoretical_pd(eta, m_a, m_e, s2)?),
                None => None,
            };
            (ed_statistic(y), eta, Some(ed_theoretical_pfa(eta, m_a, s2)?), pd)
        }
        DetectorKind::MF => {
            let s2 = *need(&side.sigma_b2, kind, "sigma_b2")?;
            let m_a = need(&side.m_a, kind, "M_A")?;
            let m_e = need(&side.m_e, kind, "M_E")?;
            let eps = mf_calibrate(pfa, m_e, m_a, s2)?;
            (
                mf_statistic(y, m_e)?,
                eps,
                Some(mf_theoretical_pfa(eps, m_e, m_a, s2)?),
                Some(mf_theoretical_pd(eps, m_e, m_a, s2)?),
            )
        }
        DetectorKind::GLRT1 => {
            let m_a = need(&side.m_a, kind, "M_A")?;
            let m_e = need(&side.m_e, kind, "M_E")?;
            let params = need(&side.eig_params, kind, "eigen-ratio parameters")?;
            let eta = glrt1_calibrate(pfa, m_e, params)?;
            (
                glrt1_statistic(y, m_a, m_e)?,
                eta,
                Some(glrt1_pfa_bound(eta, m_e, params)?),
                Some(glrt1_pd_bound(eta, m_e, params)?),
            )
        }
        DetectorKind::GLRT2 => {
            let s2 = *need(&side.sigma_b2, kind, "sigma_b2 (threshold only)")?;
            let m_a = need(&side.m_a, kind, "M_A")?;
            need(&side.omega, kind, "omega")?;
            let tau = glrt2_calibrate(pfa, m_a, s2)?;
            let pd = match &side.m_e {
                Some(m_e) => Some(glrt2_theoretical_pd(tau, m_a, m_e, s2)?),
                None => None,
            };
            (glrt2_statistic(y, m_a)?, tau, Some(glrt2_theoretical_pfa(tau, m_a, s2)?), pd)
        }
    };
    Ok(DetectorReport {
        kind,
        statistic,
        threshold,
        decision: decide(statistic, threshold),
        theoretical_pfa: pfa_th,
        theoretical_pd: pd_th,
    })
}
