//! Network configuration, channel draws, LO-leakage tones and the sensing
//! observation `Y = M_E + M_A + N`.

use std::f64::consts::{PI, TAU};
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::randmat::{add_complex_noise, standard_complex_gaussian, ComplexMatrix};
use crate::specfun::Probability;

/// Scenario parameters. Powers are linear mW on a scale where unit noise
/// power is 0 dBm; leakage levels are per-antenna tone powers in dBm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub n_a: usize,
    pub n_b: usize,
    pub n_e: usize,
    pub d_ab: f64,
    pub d_ae: f64,
    pub d_be: f64,
    pub alpha: f64,
    pub p_a: f64,
    pub sigma_b2: f64,
    pub sigma_e2: f64,
    pub leak_dbm_eve: f64,
    pub leak_dbm_alice: f64,
    /// Eve's LO frequency after down-conversion, rad/sample.
    pub omega: f64,
    /// Alice's LO frequency, rad/sample.
    pub omega_tilde: f64,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub beta: Probability,
}

impl Default for NetworkConfig {
    /// Four antennas everywhere, Eve 10 m from both terminals, -50 dBm leakage
    /// per antenna, unit noise, a 200 kHz IF sampled at 1 MHz.
    fn default() -> Self {
        NetworkConfig {
            n_a: 4,
            n_b: 4,
            n_e: 4,
            d_ab: 10.0,
            d_ae: 10.0,
            d_be: 10.0,
            alpha: 2.0,
            p_a: 40.0,
            sigma_b2: 1.0,
            sigma_e2: 1.0,
            leak_dbm_eve: -50.0,
            leak_dbm_alice: -50.0,
            omega: 0.4 * PI,
            omega_tilde: 0.4 * PI,
            m: 100_000,
            t: 1000,
            beta: Probability::new(0.5).expect("constant"),
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n_a == 0 || self.n_b == 0 || self.n_e == 0 {
            return bad("antenna counts must be >= 1".into());
        }
        for (name, v) in [("d_ab", self.d_ab), ("d_ae", self.d_ae), ("d_be", self.d_be)] {
            if !(v > 0.0) || !v.is_finite() {
                return bad(format!("{name} must be a positive distance, got {v}"));
            }
        }
        if !(self.alpha > 0.0) {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(self.p_a >= 0.0) || !self.p_a.is_finite() {
            return bad(format!("p_a must be >= 0, got {}", self.p_a));
        }
        if !(self.sigma_b2 > 0.0) || !(self.sigma_e2 > 0.0) {
            return bad("noise powers must be positive".into());
        }
        if !self.leak_dbm_eve.is_finite() || !self.leak_dbm_alice.is_finite() {
            return bad("leakage levels must be finite".into());
        }
        if !self.omega.is_finite() || !self.omega_tilde.is_finite() {
            return bad("LO frequencies must be finite".into());
        }
        if self.m < self.n_b || self.m == 0 {
            return bad(format!("need M >= n_b, got M={}, n_b={}", self.m, self.n_b));
        }
        if self.t == 0 {
            return bad("T must be >= 1".into());
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: NetworkConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Path-loss amplitude factor `√(d^{-α})`.
    pub fn amplitude_gain(&self, distance: f64) -> f64 {
        distance.powf(-0.5 * self.alpha)
    }
}

/// Which hypothesis generated an observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hypothesis {
    H0,
    H1,
}

/// One Rayleigh realization of every link.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// Alice → Bob, `N_b × N_a`.
    pub h_ba: ComplexMatrix,
    /// Alice → Eve, `N_e × N_a`.
    pub h_ea: ComplexMatrix,
    /// Eve → Bob leakage path, `N_b × N_e`.
    pub h_be: ComplexMatrix,
    /// Eve → Alice leakage path, `N_a × N_e`.
    pub h_ae: ComplexMatrix,
}

/// Draws all channels with i.i.d. `CN(0, 1)` entries.
pub fn draw_channels<R: Rng + ?Sized>(config: &NetworkConfig, rng: &mut R) -> ChannelSet {
    let (na, nb, ne) = (config.n_a, config.n_b, config.n_e);
    ChannelSet {
        h_ba: standard_complex_gaussian(nb, na, rng),
        h_ea: standard_complex_gaussian(ne, na, rng),
        h_be: standard_complex_gaussian(nb, ne, rng),
        h_ae: standard_complex_gaussian(na, ne, rng),
    }
}

/// How the LO phase evolves over a sensing epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseMode {
    /// One uniform phase per antenna, held for the whole epoch.
    #[default]
    ConstantRandom,
    /// A fresh uniform phase per antenna and sample.
    PerSampleRandom,
}

/// Per-antenna unmodulated tones `A_i e^{j(ωn + θ_i[n])}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeakageSpec {
    pub amplitudes: Vec<f64>,
    pub omega: f64,
    /// `antennas × M` phase offsets in radians.
    pub phases: DMatrix<f64>,
}

impl LeakageSpec {
    pub fn antennas(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn samples(&self) -> usize {
        self.phases.ncols()
    }

    /// Baseband samples `s_d[n]` stacked as an `antennas × M` matrix.
    pub fn waveform(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.antennas(), self.samples(), |i, n| {
            Complex64::from_polar(self.amplitudes[i], self.omega * n as f64 + self.phases[(i, n)])
        })
    }
}

/// Tone amplitude in √mW whose power `A²/2` equals `dbm`.
pub fn leakage_amplitude(dbm: f64) -> f64 {
    (2.0 * 10f64.powf(dbm / 10.0)).sqrt()
}

pub fn make_leakage<R: Rng + ?Sized>(
    antennas: usize,
    leak_dbm: f64,
    omega: f64,
    samples: usize,
    phase_mode: PhaseMode,
    rng: &mut R,
) -> LeakageSpec {
    let amp = leakage_amplitude(leak_dbm);
    let phases = match phase_mode {
        PhaseMode::ConstantRandom => {
            let per_antenna: Vec<f64> = (0..antennas).map(|_| rng.random::<f64>() * TAU).collect();
            DMatrix::from_fn(antennas, samples, |i, _| per_antenna[i])
        }
        PhaseMode::PerSampleRandom => {
            // row-major fill so the stream order does not depend on storage
            let mut phases = DMatrix::zeros(antennas, samples);
            for i in 0..antennas {
                for n in 0..samples {
                    phases[(i, n)] = rng.random::<f64>() * TAU;
                }
            }
            phases
        }
    };
    LeakageSpec { amplitudes: vec![amp; antennas], omega, phases }
}

/// `[√(d^{-α}) H s_d[0], …, √(d^{-α}) H s_d[M-1]]`.
pub fn mean_matrix(
    channel: &ComplexMatrix,
    distance: f64,
    alpha: f64,
    leakage: &LeakageSpec,
) -> Result<ComplexMatrix> {
    if channel.ncols() != leakage.antennas() {
        return Err(Error::DimensionMismatch(format!(
            "channel has {} inputs, leakage has {} antennas",
            channel.ncols(),
            leakage.antennas()
        )));
    }
    let gain = Complex64::new(distance.powf(-0.5 * alpha), 0.0);
    Ok(channel * leakage.waveform() * gain)
}

/// An `N × M` sensing observation together with the means that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationMatrix {
    pub y: ComplexMatrix,
    pub m_a: ComplexMatrix,
    pub m_e: ComplexMatrix,
    pub hypothesis: Hypothesis,
}

impl ObservationMatrix {
    /// `M_1 = M_E + M_A`.
    pub fn m_1(&self) -> ComplexMatrix {
        &self.m_e + &self.m_a
    }
}

/// Which legitimate terminal is sensing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sensor {
    Bob,
    Alice,
}

/// Means seen by a sensor: the other legitimate terminal's leakage (known
/// interference `M_A`) and Eve's leakage `M_E`.
///
/// Bob hears Alice through `H_ba` and Eve through `H_be`. Alice hears Bob
/// through the reciprocal channel `H_baᵀ` and Eve through `H_ae`; her
/// partner leakage therefore has `N_b` antennas.
pub fn sensor_means(
    sensor: Sensor,
    config: &NetworkConfig,
    channels: &ChannelSet,
    partner_leakage: &LeakageSpec,
    eve_leakage: &LeakageSpec,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    match sensor {
        Sensor::Bob => Ok((
            mean_matrix(&channels.h_ba, config.d_ab, config.alpha, partner_leakage)?,
            mean_matrix(&channels.h_be, config.d_be, config.alpha, eve_leakage)?,
        )),
        Sensor::Alice => Ok((
            mean_matrix(&channels.h_ba.transpose(), config.d_ab, config.alpha, partner_leakage)?,
            mean_matrix(&channels.h_ae, config.d_ae, config.alpha, eve_leakage)?,
        )),
    }
}

/// Adds `CN(0, σ²)` noise to the hypothesis mean. Under `H0` the stored
/// `m_e` is zeroed.
pub fn observe<R: Rng + ?Sized>(
    m_a: &ComplexMatrix,
    m_e: &ComplexMatrix,
    hypothesis: Hypothesis,
    sigma2: f64,
    rng: &mut R,
) -> Result<ObservationMatrix> {
    if m_a.shape() != m_e.shape() {
        return Err(Error::DimensionMismatch(format!(
            "M_A is {:?}, M_E is {:?}",
            m_a.shape(),
            m_e.shape()
        )));
    }
    let (y, m_e) = match hypothesis {
        Hypothesis::H0 => (m_a.clone(), ComplexMatrix::zeros(m_a.nrows(), m_a.ncols())),
        Hypothesis::H1 => (m_a + m_e, m_e.clone()),
    };
    let mut y = y;
    add_complex_noise(&mut y, sigma2, rng);
    Ok(ObservationMatrix { y, m_a: m_a.clone(), m_e, hypothesis })
}

/// Bob's observation under `hypothesis`; his own leakage is assumed removed.
pub fn synthesize_observation<R: Rng + ?Sized>(
    config: &NetworkConfig,
    channels: &ChannelSet,
    hypothesis: Hypothesis,
    leakage_alice: &LeakageSpec,
    leakage_eve: &LeakageSpec,
    rng: &mut R,
) -> Result<ObservationMatrix> {
    let (m_a, m_e) = sensor_means(Sensor::Bob, config, channels, leakage_alice, leakage_eve)?;
    observe(&m_a, &m_e, hypothesis, config.sigma_b2, rng)
}
