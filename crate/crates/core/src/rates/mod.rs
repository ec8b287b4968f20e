//! Rate accounting: MIMO mutual information, waterfilling, artificial-noise
//! designs, leakage to Eve, decision fusion and the block-average secrecy
//! rate.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ChannelSet, NetworkConfig};
use crate::randmat::{hermitian_eigen, hermitian_eigenvalues, ComplexMatrix};
use crate::specfun::Probability;

/// Large-scale parameters of one link: received SNR per unit transmit power
/// is `d^{-α} / σ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub distance: f64,
    pub alpha: f64,
    pub noise_var: f64,
}

impl Link {
    pub fn gain(&self) -> f64 {
        self.distance.powf(-self.alpha) / self.noise_var
    }

    pub fn alice_bob(c: &NetworkConfig) -> Link {
        Link { distance: c.d_ab, alpha: c.alpha, noise_var: c.sigma_b2 }
    }

    pub fn alice_eve(c: &NetworkConfig) -> Link {
        Link { distance: c.d_ae, alpha: c.alpha, noise_var: c.sigma_e2 }
    }
}

/// Data and artificial-noise covariances.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmitDesign {
    pub q_data: ComplexMatrix,
    pub q_an: ComplexMatrix,
    pub rho: f64,
}

impl TransmitDesign {
    pub fn total_power(&self) -> f64 {
        trace_re(&self.q_data) + trace_re(&self.q_an)
    }
}

/// Interference-plus-noise covariance at Eve.
#[derive(Debug, Clone, PartialEq)]
pub struct EveNoiseCov {
    pub z_e: ComplexMatrix,
}

impl EveNoiseCov {
    /// `σ_e² I + d^{-α} H_ea Q_an H_eaᴴ`.
    pub fn new(h_ea: &ComplexMatrix, q_an: &ComplexMatrix, sigma_e2: f64, distance: f64, alpha: f64) -> Self {
        let n = h_ea.nrows();
        let pl = Complex64::new(distance.powf(-alpha), 0.0);
        let z_e = ComplexMatrix::identity(n, n) * Complex64::new(sigma_e2, 0.0)
            + h_ea * q_an * h_ea.adjoint() * pl;
        EveNoiseCov { z_e }
    }

    pub fn white(n: usize, sigma_e2: f64) -> Self {
        EveNoiseCov { z_e: ComplexMatrix::identity(n, n) * Complex64::new(sigma_e2, 0.0) }
    }
}

/// Per-block rate summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub r_b: f64,
    pub r_s: f64,
    pub r_e: f64,
    pub r_b_tilde: f64,
    pub r_bar_s: f64,
    pub p_dc: Probability,
    pub p_fc: Probability,
}

pub fn trace_re(a: &ComplexMatrix) -> f64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)].re).sum()
}

fn hermitian_part(a: &ComplexMatrix) -> ComplexMatrix {
    (a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

/// `log₂ det A` for Hermitian positive definite `A`, from its eigenvalues.
pub fn log2_det_hermitian(a: &ComplexMatrix) -> Result<f64> {
    let eig = hermitian_eigenvalues(&hermitian_part(a));
    if eig.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::Degenerate("matrix is not positive definite".into()));
    }
    Ok(eig.iter().map(|l| l.log2()).sum())
}

/// `log₂ |det A|` through an LU factorization.
pub fn log2_det_lu(a: &ComplexMatrix) -> f64 {
    a.clone().lu().determinant().norm().log2()
}

fn check_covariance(q: &ComplexMatrix, what: &str) -> Result<()> {
    if q.nrows() != q.ncols() {
        return Err(Error::DimensionMismatch(format!("{what} is not square")));
    }
    let scale = trace_re(q).abs().max(1.0);
    let herm = (q - q.adjoint()).norm();
    if herm > 1e-9 * scale {
        return Err(Error::Domain(format!("{what} is not Hermitian")));
    }
    if let Some(&min) = hermitian_eigenvalues(&hermitian_part(q)).last() {
        if min < -1e-10 * scale {
            return Err(Error::Domain(format!("{what} is not PSD (eigenvalue {min:e})")));
        }
    }
    Ok(())
}

/// `log₂ |I + g H Q Hᴴ|`.
pub fn mutual_information(h: &ComplexMatrix, q: &ComplexMatrix, gain: f64) -> Result<f64> {
    if h.ncols() != q.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "channel has {} inputs, covariance is {}x{}",
            h.ncols(),
            q.nrows(),
            q.ncols()
        )));
    }
    let n = h.nrows();
    let a = ComplexMatrix::identity(n, n) + h * q * h.adjoint() * Complex64::new(gain, 0.0);
    log2_det_hermitian(&a)
}

/// Signed and reporting (floored at zero) secrecy rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecrecyRate {
    pub raw: f64,
    pub floored: f64,
}

/// Bob's rate minus Eve's rate for input covariance `q`, both under white
/// noise.
pub fn secrecy_rate_instant(
    channels: &ChannelSet,
    q: &ComplexMatrix,
    config: &NetworkConfig,
) -> Result<SecrecyRate> {
    check_covariance(q, "Q")?;
    let tr = trace_re(q);
    if tr > config.p_a + 1e-9 * config.p_a.max(1.0) {
        return Err(Error::Domain(format!("Tr Q = {tr} exceeds P_a = {}", config.p_a)));
    }
    let bob = mutual_information(&channels.h_ba, q, Link::alice_bob(config).gain())?;
    let eve = mutual_information(&channels.h_ea, q, Link::alice_eve(config).gain())?;
    let raw = bob - eve;
    Ok(SecrecyRate { raw, floored: raw.max(0.0) })
}

/// Waterfilling levels `max(0, μ − 1/g_i)` summing to `p_total`.
pub fn waterfill_levels(gains: &[f64], p_total: f64) -> Result<(Vec<f64>, f64)> {
    let g_max = gains.iter().copied().fold(0.0, f64::max);
    if !(g_max > 0.0) {
        return Err(Error::Degenerate("channel has rank zero".into()));
    }
    let alloc = |mu: f64| -> f64 {
        gains.iter().filter(|&&g| g > 0.0).map(|&g| (mu - 1.0 / g).max(0.0)).sum()
    };
    let (mut lo, mut hi) = (0.0, p_total + 1.0 / g_max);
    while alloc(hi) < p_total {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if alloc(mid) < p_total {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    let mu = 0.5 * (lo + hi);
    let mut levels: Vec<f64> =
        gains.iter().map(|&g| if g > 0.0 { (mu - 1.0 / g).max(0.0) } else { 0.0 }).collect();
    // remove the bisection residue so the budget is met to round-off
    let s: f64 = levels.iter().sum();
    if s > 0.0 {
        levels.iter_mut().for_each(|p| *p *= p_total / s);
    }
    Ok((levels, mu))
}

/// Capacity-achieving input covariance for `h` under a total power budget.
pub fn waterfill(
    h: &ComplexMatrix,
    p_total: f64,
    noise_var: f64,
    distance: f64,
    alpha: f64,
) -> Result<ComplexMatrix> {
    if !(p_total >= 0.0) {
        return Err(Error::Domain(format!("power budget must be >= 0, got {p_total}")));
    }
    let n = h.ncols();
    if p_total == 0.0 {
        return Ok(ComplexMatrix::zeros(n, n));
    }
    let gain = Link { distance, alpha, noise_var }.gain();
    let (eig, v) = hermitian_eigen(&(h.adjoint() * h));
    let tol = 1e-12 * eig[0].max(0.0);
    let gains: Vec<f64> = eig.iter().map(|&l| if l > tol { gain * l } else { 0.0 }).collect();
    let (levels, _) = waterfill_levels(&gains, p_total)?;
    Ok(eigen_covariance(&v, &levels))
}

fn eigen_covariance(v: &ComplexMatrix, levels: &[f64]) -> ComplexMatrix {
    let n = v.nrows();
    let mut q = ComplexMatrix::zeros(n, n);
    for (i, &p) in levels.iter().enumerate() {
        if p > 0.0 {
            let col = v.column(i);
            q += col * col.adjoint() * Complex64::new(p, 0.0);
        }
    }
    q
}

/// Orthonormal basis of the null space of `h` (as columns).
pub fn null_space(h: &ComplexMatrix) -> ComplexMatrix {
    let (eig, v) = hermitian_eigen(&(h.adjoint() * h));
    let tol = 1e-10 * eig[0].max(f64::MIN_POSITIVE) * h.ncols() as f64;
    let idx: Vec<usize> = (0..eig.len()).filter(|&i| eig[i] <= tol).collect();
    ComplexMatrix::from_fn(h.ncols(), idx.len(), |r, c| v[(r, idx[c])])
}

fn check_rho(rho: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::Domain(format!("rho must be in [0, 1], got {rho}")));
    }
    Ok(())
}

/// Data waterfilled over `ρ P` on `h_ba`; the remaining power spread
/// isotropically over the null space of `h_ba` as jamming.
pub fn an_design(h_ba: &ComplexMatrix, p_total: f64, rho: f64, link: &Link) -> Result<TransmitDesign> {
    check_rho(rho)?;
    let n = h_ba.ncols();
    let q_data = waterfill(h_ba, rho * p_total, link.noise_var, link.distance, link.alpha)?;
    let an_power = (1.0 - rho) * p_total;
    if an_power == 0.0 {
        return Ok(TransmitDesign { q_data, q_an: ComplexMatrix::zeros(n, n), rho });
    }
    let ns = null_space(h_ba);
    if ns.ncols() == 0 {
        return Err(Error::Config(format!(
            "H_ba ({}x{n}) has no null space; artificial noise needs N_a > rank(H_ba)",
            h_ba.nrows()
        )));
    }
    let q_an = &ns * ns.adjoint() * Complex64::new(an_power / ns.ncols() as f64, 0.0);
    Ok(TransmitDesign { q_data, q_an, rho })
}

/// Artificial-noise design that also works without a null space.
///
/// With a null space this is [`an_design`]. Otherwise the jamming power
/// goes into the weakest eigenmode of `H_baᴴH_ba` and the data is
/// waterfilled over the remaining modes. Distinct eigenmodes reach Bob
/// along orthogonal directions, so the jamming does not reduce his rate.
pub fn secure_design(h_ba: &ComplexMatrix, p_total: f64, rho: f64, link: &Link) -> Result<TransmitDesign> {
    check_rho(rho)?;
    if rho == 1.0 || null_space(h_ba).ncols() > 0 {
        return an_design(h_ba, p_total, rho, link);
    }
    let n = h_ba.ncols();
    if n < 2 {
        return Err(Error::Config(
            "a single transmit antenna leaves no room for artificial noise".into(),
        ));
    }
    let (eig, v) = hermitian_eigen(&(h_ba.adjoint() * h_ba));
    let g = link.gain();
    let mut gains: Vec<f64> = eig.iter().map(|&l| g * l).collect();
    gains[n - 1] = 0.0;
    let data_power = rho * p_total;
    let q_data = if data_power > 0.0 {
        let (levels, _) = waterfill_levels(&gains, data_power)?;
        eigen_covariance(&v, &levels)
    } else {
        ComplexMatrix::zeros(n, n)
    };
    let mut an_levels = vec![0.0; n];
    an_levels[n - 1] = (1.0 - rho) * p_total;
    Ok(TransmitDesign { q_data, q_an: eigen_covariance(&v, &an_levels), rho })
}

/// Bob's rate with jamming `q_an` treated as interference.
pub fn bob_rate(h_ba: &ComplexMatrix, design: &TransmitDesign, link: &Link) -> Result<f64> {
    let n = h_ba.nrows();
    let g = Complex64::new(link.gain(), 0.0);
    let interf = ComplexMatrix::identity(n, n) + h_ba * &design.q_an * h_ba.adjoint() * g;
    let total = &interf + h_ba * &design.q_data * h_ba.adjoint() * g;
    Ok(log2_det_hermitian(&total)? - log2_det_hermitian(&interf)?)
}

/// `log₂ |I + d^{-α} H_ea Q H_eaᴴ Z_e^{-1}|`.
pub fn leakage_rate(
    h_ea: &ComplexMatrix,
    q_data: &ComplexMatrix,
    z_e: &EveNoiseCov,
    distance: f64,
    alpha: f64,
) -> Result<f64> {
    check_covariance(q_data, "Q")?;
    let pl = Complex64::new(distance.powf(-alpha), 0.0);
    let signal = h_ea * q_data * h_ea.adjoint() * pl;
    // |I + S Z⁻¹| = |Z + S| / |Z|
    let ld_z = log2_det_hermitian(&z_e.z_e)
        .map_err(|_| Error::Degenerate("Eve's noise covariance is singular".into()))?;
    Ok(log2_det_hermitian(&(&z_e.z_e + signal))? - ld_z)
}

/// `d_ae^{-α} N_e (P_a/N_a) log₂e`.
pub fn avg_leakage_approx(config: &NetworkConfig) -> f64 {
    config.d_ae.powf(-config.alpha) * config.n_e as f64 * config.p_a / config.n_a as f64
        * std::f64::consts::LOG2_E
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum FusionRule {
    And,
    #[default]
    Or,
}

impl std::str::FromStr for FusionRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "AND" => Ok(FusionRule::And),
            "OR" => Ok(FusionRule::Or),
            _ => Err(Error::Config(format!("unknown fusion rule {s:?}"))),
        }
    }
}

pub fn fuse(p1: Probability, p2: Probability, rule: FusionRule) -> Probability {
    let (a, b) = (p1.get(), p2.get());
    Probability::clamped(match rule {
        FusionRule::And => a * b,
        FusionRule::Or => 1.0 - (1.0 - a) * (1.0 - b),
    })
}

/// Hard-decision counterpart of [`fuse`].
pub fn fuse_decisions(d1: bool, d2: bool, rule: FusionRule) -> bool {
    match rule {
        FusionRule::And => d1 && d2,
        FusionRule::Or => d1 || d2,
    }
}

/// `R_b P_dc (1−β) + R_s P_dc β + (R_b − R_e)(1 − P_dc) β + R̃_b P_fc (1−β)`.
pub fn avg_secrecy_rate(
    r_b: f64,
    r_s: f64,
    r_e: f64,
    r_b_tilde: f64,
    p_dc: Probability,
    p_fc: Probability,
    beta: Probability,
) -> f64 {
    let (pd, pf, b) = (p_dc.get(), p_fc.get(), beta.get());
    r_b * pd * (1.0 - b) + r_s * pd * b + (r_b - r_e) * (1.0 - pd) * b + r_b_tilde * pf * (1.0 - b)
}
