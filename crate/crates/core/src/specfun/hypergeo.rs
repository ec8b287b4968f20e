//! Gauss hypergeometric function by its power series.

use crate::error::{domain, Error, Result};

const MAX_TERMS: usize = 1_000_000;

/// A summed hypergeometric series together with convergence diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct SeriesSum {
    pub value: f64,
    /// Number of terms added, including the leading 1.
    pub terms: usize,
    /// Magnitude of the last term added.
    pub last_term: f64,
}

/// `₂F₁(a, b; c; x)` for `|x| < 1`, with diagnostics.
pub fn gauss_2f1_series(a: f64, b: f64, c: f64, x: f64) -> Result<SeriesSum> {
    if c <= 0.0 && c.fract() == 0.0 {
        return domain(format!("2F1 undefined for nonpositive integer c={c}"));
    }
    if !x.is_finite() || x.abs() >= 1.0 {
        return Err(Error::Convergence(format!(
            "2F1 power series needs |x| < 1, got {x}"
        )));
    }
    let mut sum = 1.0;
    let mut term = 1.0;
    let mut n = 0.0;
    for i in 1..MAX_TERMS {
        let ratio = (a + n) * (b + n) / ((c + n) * (n + 1.0)) * x;
        term *= ratio;
        n += 1.0;
        sum += term;
        if term == 0.0 {
            // terminating series (a or b a nonpositive integer)
            return Ok(SeriesSum { value: sum, terms: i + 1, last_term: 0.0 });
        }
        let next_ratio = ((a + n) * (b + n) / ((c + n) * (n + 1.0)) * x).abs();
        if next_ratio < 1.0 && term.abs() < 1e-17 * sum.abs() {
            return Ok(SeriesSum { value: sum, terms: i + 1, last_term: term.abs() });
        }
    }
    Err(Error::Convergence(format!(
        "2F1({a}, {b}; {c}; {x}) did not converge in {MAX_TERMS} terms"
    )))
}

/// `₂F₁(a, b; c; x)` for `|x| < 1`.
pub fn gauss_2f1(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    gauss_2f1_series(a, b, c, x).map(|s| s.value)
}
