mod common;

use common::*;
use lodetect::detect::ed_statistic;
use lodetect::model::*;
use lodetect::randmat::{frobenius_sq, ComplexMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small() -> NetworkConfig {
    NetworkConfig { n_a: 4, n_b: 4, n_e: 2, m: 64, ..NetworkConfig::default() }
}

#[test]
fn channel_entries_have_unit_power() {
    let cfg = small();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 10_000;
    let (mut ba, mut ea, mut be, mut ae) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..n {
        let ch = draw_channels(&cfg, &mut rng);
        ba += frobenius_sq(&ch.h_ba) / 16.0;
        ea += frobenius_sq(&ch.h_ea) / 8.0;
        be += frobenius_sq(&ch.h_be) / 8.0;
        ae += frobenius_sq(&ch.h_ae) / 8.0;
    }
    for (name, s) in [("h_ba", ba), ("h_ea", ea), ("h_be", be), ("h_ae", ae)] {
        assert!((s / n as f64 - 1.0).abs() < 0.03, "{name}: {}", s / n as f64);
    }
}

#[test]
fn eve_mean_energy_follows_path_loss() {
    // E‖H s[n]‖² = N_b Σ_i A_i² for unit-power Rayleigh entries
    let cfg = NetworkConfig { d_be: 3.0, alpha: 2.5, ..small() };
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let trials = 1000;
    let mut total = 0.0;
    let mut expected = 0.0;
    for _ in 0..trials {
        let ch = draw_channels(&cfg, &mut rng);
        let eve = make_leakage(cfg.n_e, cfg.leak_dbm_eve, cfg.omega, cfg.m, PhaseMode::ConstantRandom, &mut rng);
        let m_e = mean_matrix(&ch.h_be, cfg.d_be, cfg.alpha, &eve).unwrap();
        total += frobenius_sq(&m_e);
        let a2: f64 = eve.amplitudes.iter().map(|a| a * a).sum();
        expected += cfg.m as f64 * cfg.d_be.powf(-cfg.alpha) * cfg.n_b as f64 * a2;
    }
    assert!(rel_err(total, expected) < 0.05, "{total} vs {expected}");
}

#[test]
fn minus_fifty_dbm_tone_power() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let leak = make_leakage(3, -50.0, 0.3, 16, PhaseMode::PerSampleRandom, &mut rng);
    let w = leak.waveform();
    for i in 0..3 {
        for n in 0..16 {
            assert!((0.5 * w[(i, n)].norm_sqr() - 1e-5).abs() < 1e-18);
        }
    }
    let constant = make_leakage(3, -50.0, 0.3, 16, PhaseMode::ConstantRandom, &mut rng);
    assert!((0..3).all(|i| (1..16).all(|n| constant.phases[(i, n)] == constant.phases[(i, 0)])));
}

fn fixed_means(cfg: &NetworkConfig, seed: u64) -> (ComplexMatrix, ComplexMatrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ch = draw_channels(cfg, &mut rng);
    let alice = make_leakage(cfg.n_a, cfg.leak_dbm_alice, cfg.omega_tilde, cfg.m, PhaseMode::ConstantRandom, &mut rng);
    let eve = make_leakage(cfg.n_e, cfg.leak_dbm_eve, cfg.omega, cfg.m, PhaseMode::ConstantRandom, &mut rng);
    sensor_means(Sensor::Bob, cfg, &ch, &alice, &eve).unwrap()
}

#[test]
fn residual_noise_has_configured_variance() {
    let cfg = NetworkConfig { sigma_b2: 2.5, m: 2500, ..small() };
    let (m_a, m_e) = fixed_means(&cfg, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let entries = (cfg.m * cfg.n_b) as f64;

    let h0 = observe(&m_a, &m_e, Hypothesis::H0, cfg.sigma_b2, &mut rng).unwrap();
    let v0 = frobenius_sq(&(&h0.y - &m_a)) / entries;
    assert!((v0 / cfg.sigma_b2 - 1.0).abs() < 0.03, "{v0}");

    let h1 = observe(&m_a, &m_e, Hypothesis::H1, cfg.sigma_b2, &mut rng).unwrap();
    let v1 = frobenius_sq(&(&h1.y - &m_a - &m_e)) / entries;
    assert!((v1 / cfg.sigma_b2 - 1.0).abs() < 0.03, "{v1}");
}

#[test]
fn energy_mean_under_null() {
    // strong Alice leakage so the deterministic part is visible
    let cfg = NetworkConfig { leak_dbm_alice: 3.0, d_ab: 1.5, m: 32, ..small() };
    let (m_a, m_e) = fixed_means(&cfg, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let stats: Vec<f64> = (0..10_000)
        .map(|_| ed_statistic(&observe(&m_a, &m_e, Hypothesis::H0, cfg.sigma_b2, &mut rng).unwrap().y))
        .collect();
    let want = cfg.sigma_b2 * (cfg.m * cfg.n_b) as f64 + frobenius_sq(&m_a);
    let se = (variance(&stats) / stats.len() as f64).sqrt();
    assert!((mean(&stats) - want).abs() < 3.0 * se, "{} vs {want}", mean(&stats));
}

#[test]
fn paired_hypotheses_differ_by_eve_mean() {
    let cfg = small();
    let (m_a, m_e) = fixed_means(&cfg, 8);
    let h0 = observe(&m_a, &m_e, Hypothesis::H0, 1.0, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    let h1 = observe(&m_a, &m_e, Hypothesis::H1, 1.0, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    let diff = &h1.y - &h0.y - &m_e;
    assert!(frobenius_sq(&diff) < 1e-24);
}

#[test]
fn config_rejects_unknown_keys_and_bad_values() {
    let good = serde_json::to_string(&small()).unwrap();
    assert!(NetworkConfig::from_json(&good).is_ok());
    let extra = good.replacen('{', "{\"gamma\": 1.0,", 1);
    assert!(NetworkConfig::from_json(&extra).unwrap_err().is_config());
    let neg = serde_json::to_string(&NetworkConfig { d_ab: -1.0, ..small() }).unwrap();
    assert!(NetworkConfig::from_json(&neg).unwrap_err().is_config());
}
