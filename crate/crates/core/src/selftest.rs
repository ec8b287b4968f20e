//! Fast sanity checks with exactly known answers.

use lodetect::adversary::{optimal_dae, place_eve, Geometry};
use lodetect::model::NetworkConfig;
use lodetect::randmat::ComplexMatrix;
use lodetect::rates::{avg_leakage_approx, avg_secrecy_rate, fuse, waterfill, FusionRule};
use lodetect::specfun::{gaussian_q, marcum_q, reg_gamma_p, Probability};
use num_complex::Complex64;

fn p(v: f64) -> Probability {
    Probability::clamped(v)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn checks() -> Vec<(&'static str, bool)> {
    let cfg = NetworkConfig::default();
    let d_star = optimal_dae(2.0, &cfg);
    let g = Geometry::on_axis(10.0, 0.0, 0.0).expect("valid geometry");
    let h = ComplexMatrix::from_element(1, 1, Complex64::new(0.6, 0.8));
    vec![
        ("Q(0) = 1/2", close(gaussian_q(0.0).get(), 0.5, 1e-15)),
        ("Marcum Q with a = 0 is the chi tail", {
            let q = marcum_q(1.0, 0.0, 1.5).map(|v| v.get()).unwrap_or(f64::NAN);
            close(q, (-1.125f64).exp(), 1e-13)
        }),
        ("P(1, x) = 1 - e^-x", close(reg_gamma_p(1.0, 2.0).unwrap_or(f64::NAN), 1.0 - (-2.0f64).exp(), 1e-14)),
        ("AND of certain events", fuse(p(1.0), p(1.0), FusionRule::And).get() == 1.0),
        ("OR fusion arithmetic", close(fuse(p(0.3), p(0.4), FusionRule::Or).get(), 0.58, 1e-15)),
        ("no-Eve world keeps R_b P_dc", close(avg_secrecy_rate(3.0, 1.0, 2.0, 2.5, p(0.4), p(0.0), p(0.0)), 1.2, 1e-15)),
        ("always-detected world keeps R_s", close(avg_secrecy_rate(3.0, 1.0, 2.0, 2.5, p(1.0), p(0.2), p(1.0)), 1.0, 1e-15)),
        ("scalar waterfilling", waterfill(&h, 2.0, 1.0, 1.0, 2.0).map(|q| close(q[(0, 0)].re, 2.0, 1e-12)).unwrap_or(false)),
        ("zero power leaks nothing", avg_leakage_approx(&NetworkConfig { p_a: 0.0, ..cfg.clone() }) == 0.0),
        ("placement meets leakage target", close(avg_leakage_approx(&NetworkConfig { d_ae: d_star, ..cfg }), 2.0, 1e-9)),
        ("midpoint placement", close(place_eve(&g, 5.0).d_be(), 5.0, 1e-12)),
    ]
}

/// Prints one line per check; true when all pass.
pub fn run() -> bool {
    let mut ok = true;
    for (name, pass) in checks() {
        println!("{} {name}", if pass { "PASS" } else { "FAIL" });
        ok &= pass;
    }
    ok
}
