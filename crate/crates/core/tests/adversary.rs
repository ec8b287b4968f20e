mod common;

use common::binomial_se;
use lodetect::adversary::*;
use lodetect::model::NetworkConfig;
use lodetect::rates::avg_leakage_approx;
use lodetect::specfun::Probability;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Largest grid distance whose approximate leakage still meets `target`.
fn grid_search(target: f64, cfg: &NetworkConfig, lo: f64, hi: f64, points: usize) -> Option<f64> {
    let step = (hi - lo) / (points - 1) as f64;
    (0..points)
        .map(|i| lo + step * i as f64)
        .filter(|&d| avg_leakage_approx(&NetworkConfig { d_ae: d, ..cfg.clone() }) >= target)
        .last()
}

#[test]
fn closed_form_matches_grid_search() {
    let (lo, hi, points) = (0.1, 100.0, 10_000);
    let step = (hi - lo) / (points - 1) as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checked = 0;
    while checked < 20 {
        let cfg = NetworkConfig {
            n_a: rng.random_range(1..9),
            n_e: rng.random_range(1..9),
            p_a: rng.random_range(1.0..100.0),
            alpha: rng.random_range(2.0..4.0),
            ..NetworkConfig::default()
        };
        let target = rng.random_range(0.05..3.0);
        let d = optimal_dae(target, &cfg);
        if !(lo..hi).contains(&d) {
            continue;
        }
        let g = grid_search(target, &cfg, lo, hi, points).expect("feasible");
        assert!((g - d).abs() <= step, "{g} vs {d}");
        checked += 1;
    }
}

#[test]
fn antenna_sweep_trends() {
    let cfg = NetworkConfig { n_a: 2, n_b: 2, m: 2000, ..NetworkConfig::default() };
    let trials = 300;
    let rows = antenna_sweep(&cfg, &[1, 2, 4, 8], Probability::new(0.1).unwrap(), trials, 7).unwrap();
    assert_eq!(rows.len(), 4);
    for w in rows.windows(2) {
        let slack = 3.0 * (binomial_se(w[0].p_dc(), trials) + binomial_se(w[1].p_dc(), trials));
        assert!(w[1].p_dc() >= w[0].p_dc() - slack, "P_dc {} -> {}", w[0].p_dc(), w[1].p_dc());
        let se = w[0].stats.r_e_se + w[1].stats.r_e_se;
        assert!(w[1].r_e() >= w[0].r_e() - 3.0 * se, "R_e {} -> {}", w[0].r_e(), w[1].r_e());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn placement_monotone_in_every_parameter(
        r in 0.1f64..5.0, n_a in 1usize..8, n_e in 1usize..8, p in 1.0f64..100.0, alpha in 2.0f64..4.0,
    ) {
        let cfg = NetworkConfig { n_a, n_e, p_a: p, alpha, ..NetworkConfig::default() };
        let d = optimal_dae(r, &cfg);
        let at = NetworkConfig { d_ae: d, ..cfg.clone() };
        prop_assert!((avg_leakage_approx(&at) - r).abs() < 1e-9 * r.max(1.0));
        prop_assert!(optimal_dae(1.1 * r, &cfg) < d);
        let more_tx = NetworkConfig { n_a: n_a + 1, ..cfg.clone() };
        let more_rx = NetworkConfig { n_e: n_e + 1, ..cfg.clone() };
        let more_power = NetworkConfig { p_a: 1.1 * p, ..cfg.clone() };
        prop_assert!(optimal_dae(r, &more_tx) < d);
        prop_assert!(optimal_dae(r, &more_rx) > d);
        prop_assert!(optimal_dae(r, &more_power) > d);
    }

    #[test]
    fn placement_geometry(ax in -50.0f64..50.0, ay in -50.0f64..50.0, bx in -50.0f64..50.0, by in -50.0f64..50.0, frac in 0.0f64..1.5) {
        prop_assume!((ax - bx).hypot(ay - by) > 1e-3);
        let g = Geometry::new([ax, ay], [bx, by], [0.0, 0.0]).unwrap();
        let d = frac * g.d_ab();
        let placed = place_eve(&g, d);
        prop_assert!((placed.d_ae() - d).abs() < 1e-9 * d.max(1.0));
        let (u, v) = ([bx - ax, by - ay], [placed.eve_pos[0] - ax, placed.eve_pos[1] - ay]);
        let cross = u[0] * v[1] - u[1] * v[0];
        prop_assert!(cross.abs() < 1e-9 * g.d_ab() * d.max(1.0));
        if frac <= 1.0 {
            prop_assert!((placed.d_ae() + placed.d_be() - g.d_ab()).abs() < 1e-9 * g.d_ab().max(1.0));
        }
        prop_assert_eq!(placed.alice_pos, g.alice_pos);
        prop_assert_eq!(placed.bob_pos, g.bob_pos);
    }
}
