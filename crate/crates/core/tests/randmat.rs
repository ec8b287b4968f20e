mod common;

use std::sync::OnceLock;

use common::*;
use lodetect::randmat::*;
use lodetect::specfun::{reg_gamma_p, ChiSquareSpec, Probability};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `T0` draws for `M = 256`, `N_b = 4`.
fn t0_draws(samples: usize, n_b: usize, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n)
        .map(|_| scaled_max_eig_ratio(&gram(&standard_complex_gaussian(n_b, samples, &mut rng))))
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn moment_fit_tracks_the_eigen_ratio() {
    let draws = t0_draws(256, 4, 10_000, 11);
    let params = fit_moments(256, 4, &draws).unwrap();
    let cdf = |y: f64| scaled_max_eig_cdf(&params, y).unwrap().get();

    let median = draws[draws.len() / 2];
    assert!((cdf(median) - 0.5).abs() < 0.05, "F(median) = {}", cdf(median));
    assert!((cdf(4.0) - 1.0).abs() < 0.02);

    let ks = ks_distance(&draws, cdf);
    assert!(ks < 0.03, "KS = {ks}");
}

#[test]
fn calibration_is_stable_in_trial_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let small = calibrate_eig_cdf_params(256, 4, 10_000, &mut rng).unwrap();
    let large = calibrate_eig_cdf_params(256, 4, 100_000, &mut rng).unwrap();
    assert!(rel_err(small.k, large.k) < 0.05, "{} vs {}", small.k, large.k);
    assert!(rel_err(small.varpi, large.varpi) < 0.05);
}

#[test]
fn central_trace_identity() {
    let (m, n_b, s2) = (64u64, 2u64, 1.3);
    let spec = ChiSquareSpec::complex_energy(m * n_b, s2, 0.0).unwrap();
    for &x in &[50.0, 120.0, 166.4, 200.0] {
        let sf = wishart_trace_sf(&spec, x).unwrap().get();
        let want = 1.0 - reg_gamma_p((m * n_b) as f64, x / s2).unwrap();
        assert!((sf - want).abs() < 1e-10);
    }
}

fn trace_tail_check(mean: &ComplexMatrix, seed: u64) {
    let (rows, cols) = mean.shape();
    let spec = ChiSquareSpec::complex_energy((rows * cols) as u64, 1.0, frobenius_sq(mean)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 10_000;
    let traces: Vec<f64> = (0..n)
        .map(|_| {
            let x = mean + cn_matrix(rows, cols, 1.0, &mut rng);
            gram(&x).trace().re
        })
        .collect();
    let sd = spec.variance().sqrt();
    for z in [-2.0, -1.0, 0.0, 1.0, 2.0] {
        let x = spec.mean() + z * sd;
        let want = wishart_trace_sf(&spec, x).unwrap().get();
        let emp = tail_fraction(&traces, x);
        assert!((emp - want).abs() < 3.0 * binomial_se(want, n), "z={z}: {emp} vs {want}");
    }
}

#[test]
fn central_trace_matches_monte_carlo() {
    trace_tail_check(&ComplexMatrix::zeros(2, 64), 21);
}

#[test]
fn noncentral_trace_matches_monte_carlo() {
    let mean = ComplexMatrix::from_fn(2, 64, |i, n| Complex64::from_polar(0.6 + 0.3 * i as f64, 0.9 * n as f64));
    trace_tail_check(&mean, 22);
}

#[test]
fn sample_moments_of_unit_gaussian() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 100_000;
    let zero = ComplexMatrix::zeros(2, 2);
    let mut sum = ComplexMatrix::zeros(2, 2);
    let mut energy = 0.0;
    for _ in 0..n {
        let x = sample_complex_gaussian(2, 2, &zero, 1.0, &mut rng).unwrap();
        energy += frobenius_sq(&x);
        sum += x;
    }
    let mean = sum / Complex64::new(n as f64, 0.0);
    assert!(mean.iter().all(|z| z.norm() < 0.02));
    assert!((energy / (4.0 * n as f64) - 1.0).abs() < 0.02);
}

fn hermitian_psd(n: usize, cols: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    gram(&cn_matrix(n, cols, 1.0, rng))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn trace_bounded_by_ordered_eigen_products(seed in any::<u64>(), n in 2usize..6, cols in 1usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m_e = cn_matrix(n, cols, 2.0, &mut rng);
        let psi = effective_correlation(&m_e);
        let w = hermitian_psd(n, 3 * n, &mut rng);
        let lhs = (&psi * &w).trace().re;
        let rhs: f64 = hermitian_eigenvalues(&psi).iter().zip(hermitian_eigenvalues(&w)).map(|(a, b)| a * b).sum();
        prop_assert!(lhs <= rhs + 1e-9 * rhs.abs().max(1.0));
    }

    #[test]
    fn effective_correlation_is_positive_definite(seed in any::<u64>(), n in 1usize..6, cols in 1usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = effective_correlation(&cn_matrix(n, cols, 3.0, &mut rng));
        let herm = (&psi - psi.adjoint()).iter().all(|z| z.norm() < 1e-12);
        prop_assert!(herm);
        prop_assert!(*hermitian_eigenvalues(&psi).last().unwrap() >= 1.0 - 1e-12);
    }

    #[test]
    fn eigen_cdf_is_monotone(k in 0.5f64..20.0, varpi in 0.3f64..1.5, n_b in 2usize..8, ys in prop::collection::vec(1.0f64..10.0, 2..20)) {
        let params = EigCdfParams::new(512, k, varpi, n_b).unwrap();
        let mut ys = ys;
        ys.sort_by(f64::total_cmp);
        let vals: Vec<f64> = ys.iter().map(|&y| scaled_max_eig_cdf(&params, y).unwrap().get()).collect();
        prop_assert!(vals.iter().all(|v| (0.0..=1.0).contains(v)));
        prop_assert!(vals.windows(2).all(|w| w[0] <= w[1] + 1e-15));
    }

    #[test]
    fn eigen_quantile_roundtrip(p in 0.01f64..0.99) {
        static FIT: OnceLock<EigCdfParams> = OnceLock::new();
        let params = *FIT.get_or_init(|| fit_moments(256, 4, &t0_draws(256, 4, 2000, 7)).unwrap());
        let y = scaled_max_eig_quantile(&params, Probability::new(p).unwrap()).unwrap();
        prop_assert!((scaled_max_eig_cdf(&params, y).unwrap().get() - p).abs() < 1e-9);
    }
}
