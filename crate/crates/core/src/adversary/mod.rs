//! Eve's side of the game: how far she can back off from Alice while still
//! collecting a target leakage rate, where that puts her, and how her
//! antenna count trades leakage against detectability.

use serde::{Deserialize, Serialize};

use crate::detect::DetectorKind;
use crate::error::{Error, Result};
use crate::harness::blocks::{simulate_sweep_row, BlockSetup, SweepStats};
use crate::model::{NetworkConfig, PhaseMode};
use crate::rates::FusionRule;
use crate::specfun::Probability;

pub type Point = [f64; 2];

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Planar positions of the three terminals, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub alice_pos: Point,
    pub bob_pos: Point,
    pub eve_pos: Point,
}

impl Geometry {
    pub fn new(alice_pos: Point, bob_pos: Point, eve_pos: Point) -> Result<Self> {
        if dist(alice_pos, bob_pos) == 0.0 {
            return Err(Error::Config("Alice and Bob cannot share a position".into()));
        }
        Ok(Geometry { alice_pos, bob_pos, eve_pos })
    }

    /// Alice at the origin, Bob at `(d_ab, 0)`, Eve at `(x, offset)`.
    pub fn on_axis(d_ab: f64, eve_x: f64, eve_offset: f64) -> Result<Self> {
        Geometry::new([0.0, 0.0], [d_ab, 0.0], [eve_x, eve_offset])
    }

    pub fn d_ab(&self) -> f64 {
        dist(self.alice_pos, self.bob_pos)
    }

    pub fn d_ae(&self) -> f64 {
        dist(self.alice_pos, self.eve_pos)
    }

    pub fn d_be(&self) -> f64 {
        dist(self.bob_pos, self.eve_pos)
    }

    /// Copies the three distances into `config`.
    pub fn apply(&self, config: &NetworkConfig) -> NetworkConfig {
        NetworkConfig { d_ab: self.d_ab(), d_ae: self.d_ae(), d_be: self.d_be(), ..config.clone() }
    }
}

/// Largest Alice–Eve distance at which the large-array leakage
/// approximation still delivers `r_e_bar`:
/// `(R̄_e N_a / (N_e P_a log₂e))^{-1/α}`.
///
/// A non-positive target gives infinity (any distance will do).
pub fn optimal_dae(r_e_bar: f64, config: &NetworkConfig) -> f64 {
    if !(r_e_bar > 0.0) {
        return f64::INFINITY;
    }
    let per_unit = config.n_e as f64 * config.p_a * std::f64::consts::LOG2_E / config.n_a as f64;
    (r_e_bar / per_unit).powf(-1.0 / config.alpha)
}

/// Puts Eve on the ray from Alice through Bob, `d_ae_star` from Alice.
/// Beyond `d_ab` she ends up behind Bob on the extended line.
pub fn place_eve(geometry: &Geometry, d_ae_star: f64) -> Geometry {
    let (a, b) = (geometry.alice_pos, geometry.bob_pos);
    let d = geometry.d_ab();
    let u = [(b[0] - a[0]) / d, (b[1] - a[1]) / d];
    Geometry { eve_pos: [a[0] + d_ae_star * u[0], a[1] + d_ae_star * u[1]], ..*geometry }
}

/// One row of the antenna-count tradeoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AntennaRow {
    pub n_e: usize,
    pub stats: SweepStats,
}

impl AntennaRow {
    pub fn p_dc(&self) -> f64 {
        self.stats.strategies[0].p_dc
    }

    pub fn r_e(&self) -> f64 {
        self.stats.r_e
    }

    pub fn r_bar_s(&self) -> f64 {
        self.stats.strategies[0].r_bar_s
    }
}

/// Fused matched-filter detection and rate accounting for each `N_e`, all
/// else fixed. Every row reuses the same per-block seeds.
pub fn antenna_sweep(
    config: &NetworkConfig,
    n_e_range: &[usize],
    pfa: Probability,
    trials: usize,
    seed: u64,
) -> Result<Vec<AntennaRow>> {
    let setup = BlockSetup {
        detectors: vec![DetectorKind::MF],
        pfa,
        fusion: FusionRule::Or,
        rho: 0.5,
        phase_mode: PhaseMode::ConstantRandom,
    };
    antenna_sweep_with(config, n_e_range, &setup, trials, seed)
}

pub fn antenna_sweep_with(
    config: &NetworkConfig,
    n_e_range: &[usize],
    setup: &BlockSetup,
    trials: usize,
    seed: u64,
) -> Result<Vec<AntennaRow>> {
    if n_e_range.is_empty() {
        return Err(Error::Config("antenna sweep needs at least one N_e".into()));
    }
    n_e_range
        .iter()
        .map(|&n_e| {
            if n_e == 0 {
                return Err(Error::Config("N_e must be >= 1".into()));
            }
            let cfg = NetworkConfig { n_e, ..config.clone() };
            cfg.validate()?;
            let stats = simulate_sweep_row(&cfg, setup, trials, seed)?;
            Ok(AntennaRow { n_e, stats })
        })
        .collect()
}
