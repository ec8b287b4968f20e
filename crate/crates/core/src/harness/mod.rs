//! Experiment orchestration: ROC curves, rate-versus-power, rate-versus-
//! position and rate-versus-Eve-antennas sweeps, with CSV and manifest
//! output.
//!
//! Every trial draws from its own ChaCha stream derived from the master
//! seed and the trial index, results land in indexed slots and all
//! reductions run sequentially afterwards. Output is therefore identical for
//! any thread count.

pub mod blocks;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::adversary::{antenna_sweep_with, Geometry};
use crate::detect::{
    ed_statistic, ed_theoretical_pd, glrt1_pd_bound, glrt1_pfa_bound, glrt1_statistic, glrt2_statistic, glrt2_theoretical_pd, mf_statistic,
    run_detector, DetectorKind, SideInfo,
};
use crate::error::{Error, Result};
use crate::model::{
    draw_channels, make_leakage, observe, sensor_means, Hypothesis, NetworkConfig, ObservationMatrix,
    PhaseMode, Sensor,
};
use crate::randmat::{calibrate_eig_cdf_params, ComplexMatrix, EigCdfParams};
use crate::rates::FusionRule;
use crate::specfun::Probability;

use blocks::{
    rates_for_blocks, simulate_blocks, simulate_sweep_row, summarize, tag, trial_rng, BlockSetup,
    StrategyStats, SweepStats,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Roc,
    PowerSweep,
    DistanceSweep,
    AntennaSweep,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Roc => "roc",
            ExperimentKind::PowerSweep => "power_sweep",
            ExperimentKind::DistanceSweep => "distance_sweep",
            ExperimentKind::AntennaSweep => "antenna_sweep",
        }
    }
}

fn default_operating_pfa() -> f64 {
    0.1
}
fn default_rho() -> f64 {
    0.5
}
fn default_offset() -> f64 {
    1.0
}
fn default_eig_trials() -> usize {
    2000
}

/// Full description of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: ExperimentKind,
    pub config: NetworkConfig,
    /// Target false-alarm rates (ROC only).
    #[serde(default)]
    pub pfa_grid: Vec<f64>,
    /// `P_a` values, Eve x-positions or Eve antenna counts.
    #[serde(default)]
    pub sweep_grid: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub fusion_rule: FusionRule,
    pub detectors: Vec<DetectorKind>,
    /// Local false-alarm target used by the sweeps.
    #[serde(default = "default_operating_pfa")]
    pub operating_pfa: f64,
    /// Data share of the power under the artificial-noise design.
    #[serde(default = "default_rho")]
    pub rho: f64,
    /// Distance of Eve's track from the Alice–Bob axis (distance sweep).
    #[serde(default = "default_offset")]
    pub line_offset: f64,
    #[serde(default)]
    pub phase_mode: PhaseMode,
    /// Simulated draws behind the GLRT1 eigen-ratio fit.
    #[serde(default = "default_eig_trials")]
    pub eig_fit_trials: usize,
}

fn sorted_nonempty(grid: &[f64], what: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Config(format!("{what} is empty")));
    }
    if grid.iter().any(|v| !v.is_finite()) || grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Config(format!("{what} must be finite and sorted ascending")));
    }
    Ok(())
}

impl ExperimentSpec {
    /// Defaults for each experiment at full scale.
    pub fn default_for(kind: ExperimentKind) -> Self {
        let base = ExperimentSpec {
            name: kind,
            config: NetworkConfig::default(),
            pfa_grid: vec![],
            sweep_grid: vec![],
            trials: 5000,
            master_seed: 20240101,
            fusion_rule: FusionRule::Or,
            detectors: vec![DetectorKind::MF],
            operating_pfa: default_operating_pfa(),
            rho: default_rho(),
            line_offset: default_offset(),
            phase_mode: PhaseMode::ConstantRandom,
            eig_fit_trials: default_eig_trials(),
        };
        match kind {
            ExperimentKind::Roc => ExperimentSpec {
                pfa_grid: vec![0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9],
                trials: 10_000,
                detectors: DetectorKind::ALL.to_vec(),
                ..base
            },
            ExperimentKind::PowerSweep => ExperimentSpec {
                sweep_grid: vec![0.0, 20.0, 40.0, 60.0, 80.0, 100.0],
                detectors: vec![DetectorKind::ED, DetectorKind::GLRT2],
                ..base
            },
            ExperimentKind::DistanceSweep => ExperimentSpec {
                config: NetworkConfig { d_ab: 9.0, ..NetworkConfig::default() },
                sweep_grid: (0..9).map(|i| 0.5 + i as f64).collect(),
                ..base
            },
            ExperimentKind::AntennaSweep => ExperimentSpec {
                config: NetworkConfig { n_a: 2, n_b: 2, ..NetworkConfig::default() },
                sweep_grid: (1..=8).map(|n| n as f64).collect(),
                ..base
            },
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Divides `M` and the trial count by `factor` (trials stay at or above
    /// the 100-trial floor).
    pub fn scaled(&self, factor: usize) -> Self {
        let f = factor.max(1);
        let mut s = self.clone();
        s.config.m = (s.config.m / f).max(1);
        s.trials = (s.trials / f).max(100);
        s
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        if self.trials < 100 {
            return Err(Error::Config(format!("need at least 100 trials, got {}", self.trials)));
        }
        if self.detectors.is_empty() {
            return Err(Error::Config("no detectors selected".into()));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::Config(format!("rho must be in [0, 1], got {}", self.rho)));
        }
        Probability::new(self.operating_pfa)
            .map_err(|_| Error::Config(format!("operating_pfa {} is not a probability", self.operating_pfa)))?;
        match self.name {
            ExperimentKind::Roc => {
                sorted_nonempty(&self.pfa_grid, "pfa_grid")?;
                if self.pfa_grid.iter().any(|&p| !(p > 0.0 && p < 1.0)) {
                    return Err(Error::Config("pfa_grid entries must lie in (0, 1)".into()));
                }
                if self.detectors.contains(&DetectorKind::GLRT1) && self.eig_fit_trials < 1000 {
                    return Err(Error::Config("eig_fit_trials must be >= 1000".into()));
                }
            }
            ExperimentKind::PowerSweep => {
                sorted_nonempty(&self.sweep_grid, "sweep_grid")?;
                if self.sweep_grid[0] < 0.0 {
                    return Err(Error::Config("transmit powers must be >= 0".into()));
                }
            }
            ExperimentKind::DistanceSweep => {
                sorted_nonempty(&self.sweep_grid, "sweep_grid")?;
                if !(self.line_offset.is_finite()) {
                    return Err(Error::Config("line_offset must be finite".into()));
                }
            }
            ExperimentKind::AntennaSweep => {
                sorted_nonempty(&self.sweep_grid, "sweep_grid")?;
                if self.sweep_grid.iter().any(|&n| n < 1.0 || n.fract() != 0.0) {
                    return Err(Error::Config("antenna counts must be positive integers".into()));
                }
            }
        }
        if self.name != ExperimentKind::Roc && self.detectors.contains(&DetectorKind::GLRT1) {
            return Err(Error::Config("GLRT1 is only available in ROC runs".into()));
        }
        Ok(())
    }

    fn block_setup(&self) -> BlockSetup {
        BlockSetup {
            detectors: self.detectors.clone(),
            pfa: Probability::clamped(self.operating_pfa),
            fusion: self.fusion_rule,
            rho: self.rho,
            phase_mode: self.phase_mode,
        }
    }
}

/// One ROC point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocRow {
    pub detector: DetectorKind,
    pub target_pfa: f64,
    /// Mean threshold over trials (GLRT1: the pooled empirical threshold).
    pub threshold: f64,
    pub pfa_emp: f64,
    pub pd_emp: f64,
    /// Theory averaged over channel draws; bounds for GLRT1.
    pub pfa_theory: Option<f64>,
    pub pd_theory: Option<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl RocRow {
    pub fn pfa_se(&self) -> f64 {
        binomial_se(self.pfa_emp, self.trials)
    }
    pub fn pd_se(&self) -> f64 {
        binomial_se(self.pd_emp, self.trials)
    }
}

pub fn binomial_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// One point of a rate sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sweep_var: f64,
    pub p_a: f64,
    pub n_e: usize,
    pub x: Option<f64>,
    pub offset: Option<f64>,
    pub d_ae: f64,
    pub d_be: f64,
    pub stats: SweepStats,
}

impl SweepRow {
    pub fn strategy(&self, name: &str) -> Option<&StrategyStats> {
        if name == self.stats.non_adaptive.name {
            return Some(&self.stats.non_adaptive);
        }
        self.stats.strategies.iter().find(|s| s.name == name)
    }

    /// First configured detector's strategy.
    pub fn primary(&self) -> &StrategyStats {
        &self.stats.strategies[0]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Rows {
    Roc(Vec<RocRow>),
    Sweep(Vec<SweepRow>),
}

impl Rows {
    pub fn len(&self) -> usize {
        match self {
            Rows::Roc(r) => r.len(),
            Rows::Sweep(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub rows: Rows,
    pub wall_time: f64,
}

impl ExperimentResult {
    pub fn roc_rows(&self) -> &[RocRow] {
        match &self.rows {
            Rows::Roc(r) => r,
            Rows::Sweep(_) => &[],
        }
    }

    pub fn sweep_rows(&self) -> &[SweepRow] {
        match &self.rows {
            Rows::Sweep(r) => r,
            Rows::Roc(_) => &[],
        }
    }
}

pub fn run(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    match spec.name {
        ExperimentKind::Roc => run_roc(spec),
        ExperimentKind::PowerSweep => run_power_sweep(spec),
        ExperimentKind::DistanceSweep => run_distance_sweep(spec),
        ExperimentKind::AntennaSweep => run_antenna_sweep(spec),
    }
}

// ------------------------------------------------------------------- ROC

fn statistic(kind: DetectorKind, obs: &ObservationMatrix, m_e: &ComplexMatrix) -> Result<f64> {
    match kind {
        DetectorKind::ED => Ok(ed_statistic(&obs.y)),
        DetectorKind::MF => mf_statistic(&obs.y, m_e),
        DetectorKind::GLRT1 => glrt1_statistic(&obs.y, &obs.m_a, m_e),
        DetectorKind::GLRT2 => glrt2_statistic(&obs.y, &obs.m_a),
    }
}

/// Bob's means and paired H0/H1 observations for one ROC trial.
fn roc_observations(
    cfg: &NetworkConfig,
    phase_mode: PhaseMode,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<(ComplexMatrix, ObservationMatrix, ObservationMatrix)> {
    let channels = draw_channels(cfg, rng);
    let eve = make_leakage(cfg.n_e, cfg.leak_dbm_eve, cfg.omega, cfg.m, phase_mode, rng);
    let alice = make_leakage(cfg.n_a, cfg.leak_dbm_alice, cfg.omega_tilde, cfg.m, phase_mode, rng);
    let (m_a, m_e) = sensor_means(Sensor::Bob, cfg, &channels, &alice, &eve)?;
    let obs1 = observe(&m_a, &m_e, Hypothesis::H1, cfg.sigma_b2, rng)?;
    let obs0 = observe(&m_a, &m_e, Hypothesis::H0, cfg.sigma_b2, rng)?;
    Ok((m_e, obs1, obs0))
}

/// Threshold leaving a fraction of at most `pfa` of `h0` at or above it.
pub fn empirical_threshold(h0: &[f64], pfa: f64) -> f64 {
    let mut s = h0.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    let k = ((pfa * n as f64).floor() as usize).min(n);
    if k == 0 {
        let top = s[n - 1];
        return top + top.abs() * 1e-12 + f64::MIN_POSITIVE;
    }
    // k alarms: everything from s[n-k] upwards
    0.5 * (s[n - k - 1] + s[n - k])
}

#[derive(Debug, Clone, Copy, Default)]
struct RocCell {
    threshold: f64,
    alarm_h1: bool,
    alarm_h0: bool,
    pfa_theory: Option<f64>,
    pd_theory: Option<f64>,
}

pub fn run_roc(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    if spec.name != ExperimentKind::Roc {
        return Err(Error::Config("run_roc needs an ROC spec".into()));
    }
    let start = Instant::now();
    let cfg = &spec.config;
    let seed = spec.master_seed;
    let pfas: Vec<Probability> = spec.pfa_grid.iter().map(|&p| Probability::clamped(p)).collect();
    let dets = &spec.detectors;
    let use_glrt1 = dets.contains(&DetectorKind::GLRT1);

    // GLRT1: bound-law fit plus a pooled threshold from independent H0 trials
    let (eig, glrt1_thresholds): (Option<EigCdfParams>, Vec<f64>) = if use_glrt1 {
        let params = calibrate_eig_cdf_params(
            cfg.m,
            cfg.n_b,
            spec.eig_fit_trials,
            &mut trial_rng(seed, tag::EIG_FIT, 0),
        )?;
        let h0: Vec<f64> = (0..spec.trials)
            .into_par_iter()
            .map(|i| {
                let mut rng = trial_rng(seed, tag::ROC_CALIBRATION, i as u64);
                let (m_e, _, obs0) = roc_observations(cfg, spec.phase_mode, &mut rng)?;
                statistic(DetectorKind::GLRT1, &obs0, &m_e)
            })
            .collect::<Result<_>>()?;
        (Some(params), spec.pfa_grid.iter().map(|&p| empirical_threshold(&h0, p)).collect())
    } else {
        (None, vec![])
    };

    let cells: Vec<Vec<Vec<RocCell>>> = (0..spec.trials)
        .into_par_iter()
        .map(|i| -> Result<Vec<Vec<RocCell>>> {
            let mut rng = trial_rng(seed, tag::ROC, i as u64);
            let (m_e, obs1, obs0) = roc_observations(cfg, spec.phase_mode, &mut rng)?;
            dets.iter()
                .map(|&kind| {
                    let s1 = statistic(kind, &obs1, &m_e)?;
                    let s0 = statistic(kind, &obs0, &m_e)?;
                    pfas.iter()
                        .enumerate()
                        .map(|(j, &pfa)| {
                            if kind == DetectorKind::GLRT1 {
                                let eta = glrt1_thresholds[j];
                                let params = eig.as_ref().expect("fitted above");
                                return Ok(RocCell {
                                    threshold: eta,
                                    alarm_h1: s1 >= eta,
                                    alarm_h0: s0 >= eta,
                                    pfa_theory: Some(glrt1_pfa_bound(eta, &m_e, params)?.get()),
                                    pd_theory: Some(glrt1_pd_bound(eta, &m_e, params)?.get()),
                                });
                            }
                            let side = SideInfo::entitled(kind, &obs1, &m_e, cfg.sigma_b2, cfg.omega_tilde, None);
                            let rep = run_detector(kind, &obs1, &side, pfa)?;
                            // the simulator knows M_E even where the detector does not
                            let pd_theory = match kind {
                                DetectorKind::ED => Some(ed_theoretical_pd(rep.threshold, &obs1.m_a, &m_e, cfg.sigma_b2)?),
                                DetectorKind::GLRT2 => {
                                    Some(glrt2_theoretical_pd(rep.threshold, &obs1.m_a, &m_e, cfg.sigma_b2)?)
                                }
                                _ => rep.theoretical_pd,
                            };
                            Ok(RocCell {
                                threshold: rep.threshold,
                                alarm_h1: s1 >= rep.threshold,
                                alarm_h0: s0 >= rep.threshold,
                                pfa_theory: rep.theoretical_pfa.map(|p| p.get()),
                                pd_theory: pd_theory.map(|p| p.get()),
                            })
                        })
                        .collect()
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let n = spec.trials as f64;
    let mut rows = Vec::with_capacity(dets.len() * pfas.len());
    for (d, &kind) in dets.iter().enumerate() {
        for (j, &target) in spec.pfa_grid.iter().enumerate() {
            let col = cells.iter().map(|t| t[d][j]);
            let mean_opt = |f: fn(&RocCell) -> Option<f64>| -> Option<f64> {
                let v: Option<Vec<f64>> = cells.iter().map(|t| f(&t[d][j])).collect();
                v.map(|v| v.iter().sum::<f64>() / n)
            };
            rows.push(RocRow {
                detector: kind,
                target_pfa: target,
                threshold: col.clone().map(|c| c.threshold).sum::<f64>() / n,
                pfa_emp: col.clone().filter(|c| c.alarm_h0).count() as f64 / n,
                pd_emp: col.filter(|c| c.alarm_h1).count() as f64 / n,
                pfa_theory: mean_opt(|c| c.pfa_theory),
                pd_theory: mean_opt(|c| c.pd_theory),
                trials: spec.trials,
                seed,
            });
        }
    }
    Ok(ExperimentResult { spec: spec.clone(), rows: Rows::Roc(rows), wall_time: start.elapsed().as_secs_f64() })
}

// ---------------------------------------------------------------- sweeps

fn check_kind(spec: &ExperimentSpec, kind: ExperimentKind) -> Result<()> {
    spec.validate()?;
    if spec.name != kind {
        return Err(Error::Config(format!("expected a {} spec, got {}", kind.name(), spec.name.name())));
    }
    Ok(())
}

fn sweep_row(sweep_var: f64, cfg: &NetworkConfig, x: Option<f64>, offset: Option<f64>, stats: SweepStats) -> SweepRow {
    SweepRow { sweep_var, p_a: cfg.p_a, n_e: cfg.n_e, x, offset, d_ae: cfg.d_ae, d_be: cfg.d_be, stats }
}

/// Secrecy rate against `P_a`. Detection does not depend on `P_a`, so the
/// blocks are simulated once and re-rated at every power level.
pub fn run_power_sweep(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    check_kind(spec, ExperimentKind::PowerSweep)?;
    let start = Instant::now();
    let setup = spec.block_setup();
    let blocks = simulate_blocks(&spec.config, &setup, spec.trials, spec.master_seed)?;
    let rows = spec
        .sweep_grid
        .iter()
        .map(|&p_a| {
            let cfg = NetworkConfig { p_a, ..spec.config.clone() };
            let rates = rates_for_blocks(&cfg, &blocks, spec.rho)?;
            let stats = summarize(&cfg, &setup, &blocks, &rates, spec.master_seed);
            Ok(sweep_row(p_a, &cfg, None, None, stats))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentResult { spec: spec.clone(), rows: Rows::Sweep(rows), wall_time: start.elapsed().as_secs_f64() })
}

/// Eve walks along a line parallel to the Alice–Bob axis; the grid holds her
/// coordinate along the axis.
pub fn run_distance_sweep(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    check_kind(spec, ExperimentKind::DistanceSweep)?;
    let start = Instant::now();
    let setup = spec.block_setup();
    let rows = spec
        .sweep_grid
        .iter()
        .map(|&x| {
            let geo = Geometry::on_axis(spec.config.d_ab, x, spec.line_offset)?;
            let cfg = geo.apply(&spec.config);
            let stats = simulate_sweep_row(&cfg, &setup, spec.trials, spec.master_seed)?;
            Ok(sweep_row(cfg.d_ae, &cfg, Some(x), Some(spec.line_offset), stats))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentResult { spec: spec.clone(), rows: Rows::Sweep(rows), wall_time: start.elapsed().as_secs_f64() })
}

pub fn run_antenna_sweep(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    check_kind(spec, ExperimentKind::AntennaSweep)?;
    let start = Instant::now();
    let n_e: Vec<usize> = spec.sweep_grid.iter().map(|&n| n as usize).collect();
    let table = antenna_sweep_with(&spec.config, &n_e, &spec.block_setup(), spec.trials, spec.master_seed)?;
    let rows = table
        .into_iter()
        .map(|r| {
            let cfg = NetworkConfig { n_e: r.n_e, ..spec.config.clone() };
            sweep_row(r.n_e as f64, &cfg, None, None, r.stats)
        })
        .collect();
    Ok(ExperimentResult { spec: spec.clone(), rows: Rows::Sweep(rows), wall_time: start.elapsed().as_secs_f64() })
}

// ---------------------------------------------------------------- output

fn fmt(v: f64) -> String {
    format!("{v}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

fn strategy_key(name: &str) -> String {
    name.to_ascii_lowercase().replace('-', "_")
}

impl ExperimentResult {
    /// Header and records of the CSV table.
    pub fn table(&self) -> (Vec<String>, Vec<Vec<String>>) {
        match &self.rows {
            Rows::Roc(rows) => {
                let header = [
                    "detector", "target_pfa", "threshold", "pfa_emp", "pfa_se", "pd_emp", "pd_se",
                    "pfa_theory", "pd_theory", "trials", "seed",
                ];
                let body = rows
                    .iter()
                    .map(|r| {
                        vec![
                            r.detector.name().to_string(),
                            fmt(r.target_pfa),
                            fmt(r.threshold),
                            fmt(r.pfa_emp),
                            fmt(r.pfa_se()),
                            fmt(r.pd_emp),
                            fmt(r.pd_se()),
                            fmt_opt(r.pfa_theory),
                            fmt_opt(r.pd_theory),
                            r.trials.to_string(),
                            r.seed.to_string(),
                        ]
                    })
                    .collect();
                (header.iter().map(|s| s.to_string()).collect(), body)
            }
            Rows::Sweep(rows) => {
                let mut header: Vec<String> = [
                    "sweep_var", "p_a", "n_e", "x", "offset", "d_ae", "d_be", "r_b", "r_s", "r_e",
                    "r_e_se", "r_b_tilde", "r_bar_s", "p_dc", "p_fc",
                ]
                .iter()
                .map(|s| s.to_string())
                .collect();
                let names: Vec<String> = rows
                    .first()
                    .map(|r| {
                        r.stats
                            .strategies
                            .iter()
                            .chain(std::iter::once(&r.stats.non_adaptive))
                            .map(|s| strategy_key(&s.name))
                            .collect()
                    })
                    .unwrap_or_default();
                for n in &names {
                    for f in ["r_bar_s", "r_bar_s_se", "r_bar_s_formula", "p_dc", "p_fc", "advantage", "advantage_se"] {
                        header.push(format!("{f}_{n}"));
                    }
                }
                header.extend(["beta", "trials", "seed"].iter().map(|s| s.to_string()));
                let body = rows
                    .iter()
                    .map(|r| {
                        let s = &r.stats;
                        let p = r.primary();
                        let mut rec = vec![
                            fmt(r.sweep_var),
                            fmt(r.p_a),
                            r.n_e.to_string(),
                            fmt_opt(r.x),
                            fmt_opt(r.offset),
                            fmt(r.d_ae),
                            fmt(r.d_be),
                            fmt(s.r_b),
                            fmt(s.r_s),
                            fmt(s.r_e),
                            fmt(s.r_e_se),
                            fmt(s.r_b_tilde),
                            fmt(p.r_bar_s),
                            fmt(p.p_dc),
                            fmt(p.p_fc),
                        ];
                        for st in s.strategies.iter().chain(std::iter::once(&s.non_adaptive)) {
                            rec.extend([
                                fmt(st.r_bar_s),
                                fmt(st.r_bar_s_se),
                                fmt(st.r_bar_s_formula),
                                fmt(st.p_dc),
                                fmt(st.p_fc),
                                fmt(st.advantage),
                                fmt(st.advantage_se),
                            ]);
                        }
                        rec.extend([fmt(s.beta), s.trials.to_string(), s.seed.to_string()]);
                        rec
                    })
                    .collect();
                (header, body)
            }
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let (header, body) = self.table();
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&header)?;
        for rec in body {
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Io(std::io::Error::other(e)))
    }
}

/// Git-style blob hash (SHA-256 object format): `sha256("blob <len>\0" ‖ bytes)`.
pub fn blob_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub experiment: String,
    pub spec: ExperimentSpec,
    pub config_hash: String,
    pub csv: String,
    pub rows: usize,
    pub wall_time_s: f64,
    pub threads: usize,
    pub version: String,
}

/// Writes `<name>.csv` and `<name>.manifest.json` into `dir`; returns both
/// paths.
pub fn write_outputs(result: &ExperimentResult, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let name = result.spec.name.name();
    let csv_path = dir.join(format!("{name}.csv"));
    result.write_csv(std::fs::File::create(&csv_path)?)?;
    let config_json = serde_json::to_string_pretty(&result.spec.config)?;
    let manifest = Manifest {
        experiment: name.to_string(),
        spec: result.spec.clone(),
        config_hash: blob_hash(config_json.as_bytes()),
        csv: csv_path.file_name().unwrap().to_string_lossy().into_owned(),
        rows: result.rows.len(),
        wall_time_s: result.wall_time,
        threads: rayon::current_num_threads(),
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    let manifest_path = dir.join(format!("{name}.manifest.json"));
    std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)?;
    Ok((csv_path, manifest_path))
}
