//! Reference implementations used only by the tests. They share no code
//! with the library: different algorithms, plain quadrature and series.

#![allow(dead_code)]

use std::f64::consts::PI;

use lodetect::randmat::ComplexMatrix;
use num_complex::Complex64;
use quadrature::double_exponential::integrate;
use rand::Rng;
use rand_distr::StandardNormal;

pub fn lgamma(x: f64) -> f64 {
    libm::lgamma(x)
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// `ln I_ν(z)` by its ascending series, summed in log space.
pub fn ln_bessel_i_series(nu: f64, z: f64) -> f64 {
    if z == 0.0 {
        return if nu == 0.0 { 0.0 } else { f64::NEG_INFINITY };
    }
    let lz = (0.5 * z).ln();
    let n_terms = (z as usize) + 80;
    let terms: Vec<f64> = (0..n_terms)
        .map(|j| {
            let j = j as f64;
            (2.0 * j + nu) * lz - lgamma(j + 1.0) - lgamma(j + nu + 1.0)
        })
        .collect();
    log_sum_exp(&terms)
}

/// Log of the Marcum Q integrand,
/// `x (x/a)^{k-1} e^{-(x²+a²)/2} I_{k-1}(a x)`, and its `a = 0` limit.
fn marcum_ln_density(k: f64, a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if a == 0.0 {
        return (2.0 * k - 1.0) * x.ln() - 0.5 * x * x - (k - 1.0) * 2f64.ln() - lgamma(k);
    }
    x.ln() + (k - 1.0) * (x / a).ln() - 0.5 * (x * x + a * a) + ln_bessel_i_series(k - 1.0, a * x)
}

/// `Q_k(a, b)` by double-exponential quadrature of the defining integral.
/// Integrates whichever side of `b` holds less mass; the upper tail is
/// normalized by the integrand at `b` so tiny tails keep relative accuracy.
pub fn marcum_q_quadrature(k: f64, a: f64, b: f64) -> f64 {
    let mode = a.max((2.0 * k - 1.0).max(0.0).sqrt());
    let top = a + b + 2.0 * k.sqrt() + 40.0;
    if b < mode {
        let lower = integrate(|x: f64| marcum_ln_density(k, a, x).exp(), 0.0, b, 1e-17).integral;
        1.0 - lower
    } else {
        let ln0 = marcum_ln_density(k, a, b);
        let tail = integrate(|x: f64| (marcum_ln_density(k, a, x) - ln0).exp(), b, top, 1e-15).integral;
        tail * ln0.exp()
    }
}

/// Lower regularized gamma by `x^s e^{-x}/Γ(s+1) · Σ xⁿ/((s+1)…(s+n))`.
pub fn reg_gamma_p_series(s: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut n = 1.0;
    while term > 1e-18 * sum {
        term *= x / (s + n);
        sum += term;
        n += 1.0;
    }
    (s * x.ln() - x - lgamma(s + 1.0) + sum.ln()).exp()
}

/// `P(s, x)` by quadrature of the gamma density.
pub fn reg_gamma_p_quadrature(s: f64, x: f64) -> f64 {
    let ln_norm = lgamma(s);
    let f = |t: f64| if t <= 0.0 { 0.0 } else { ((s - 1.0) * t.ln() - t - ln_norm).exp() };
    integrate(f, 0.0, x, 1e-16).integral
}

/// `₂F₁(a, b; c; x)` via Euler's integral; needs `c > b > 0`. Each half of
/// the unit interval is mapped so its endpoint power singularity vanishes.
pub fn gauss_2f1_euler(a: f64, b: f64, c: f64, x: f64) -> f64 {
    assert!(c > b && b > 0.0);
    let e = c - b;
    let ln_norm = lgamma(c) - lgamma(b) - lgamma(c - b);
    // t = u^{1/b} on [0, 1/2]
    let left = |u: f64| {
        let t = u.powf(1.0 / b);
        ((e - 1.0) * (1.0 - t).ln() - a * (1.0 - x * t).ln()).exp() / b
    };
    // 1 - t = v^{1/e} on [1/2, 1]
    let right = |v: f64| {
        let t = 1.0 - v.powf(1.0 / e);
        ((b - 1.0) * t.ln() - a * (1.0 - x * t).ln()).exp() / e
    };
    let sum = integrate(left, 0.0, 0.5f64.powf(b), 1e-16).integral
        + integrate(right, 0.0, 0.5f64.powf(e), 1e-16).integral;
    sum * ln_norm.exp()
}

/// Fixed-length hypergeometric series.
pub fn gauss_2f1_terms(a: f64, b: f64, c: f64, x: f64, terms: usize) -> f64 {
    let mut t = 1.0;
    let mut sum = 1.0;
    for n in 0..terms {
        let n = n as f64;
        t *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * x;
        sum += t;
    }
    sum
}

/// `Q(x)` from `∫_x^∞ φ`, written as `φ(x)·∫_0^∞ e^{-xu - u²/2} du` so the
/// relative accuracy survives deep into the tail.
pub fn gaussian_q_quadrature(x: f64) -> f64 {
    if x < 0.0 {
        return 1.0 - gaussian_q_quadrature(-x);
    }
    let inner = integrate(|u: f64| (-x * u - 0.5 * u * u).exp(), 0.0, 40.0, 1e-16).integral;
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt() * inner
}

/// Relative error with an absolute floor for values near zero.
pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1e-300)
}

/// Standard error of a binomial proportion.
pub fn binomial_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Two-sided KS distance between sorted samples and a CDF.
pub fn ks_distance(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
    }
    d
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Fraction of `xs` at or above `t`.
pub fn tail_fraction(xs: &[f64], t: f64) -> f64 {
    xs.iter().filter(|&&x| x >= t).count() as f64 / xs.len() as f64
}

/// Complex Gaussian matrix drawn entry by entry, real part first.
pub fn cn_matrix<R: Rng>(rows: usize, cols: usize, scale: f64, rng: &mut R) -> ComplexMatrix {
    let s = scale * 0.5f64.sqrt();
    let mut m = ComplexMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            m[(i, j)] = Complex64::new(s * re, s * im);
        }
    }
    m
}
