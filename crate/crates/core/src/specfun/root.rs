//! Bracketed scalar root finding (Brent's method).

use crate::error::{Error, Result};

/// Stopping rule for [`brent`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    /// Absolute tolerance on the abscissa.
    pub x_abs: f64,
    /// Relative tolerance on the abscissa.
    pub x_rel: f64,
    /// Stop as soon as `|f(x)| <= f_abs`.
    pub f_abs: f64,
    pub max_iter: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            x_abs: 1e-300,
            x_rel: 4.0 * f64::EPSILON,
            f_abs: 0.0,
            max_iter: 300,
        }
    }
}

/// Finds a root of `f` in `[a, b]`, which must bracket a sign change.
pub fn brent<F>(mut f: F, mut a: f64, mut b: f64, tol: Tolerance) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Convergence(format!(
            "root not bracketed: f({a})={fa}, f({b})={fb}"
        )));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..tol.max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * tol.x_rel * b.abs() + 0.5 * tol.x_abs;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 || fb.abs() <= tol.f_abs {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // inverse quadratic interpolation, or secant when only two points
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if d.abs() > tol1 {
            b += d;
        } else {
            b += tol1.copysign(xm);
        }
        fb = f(b)?;
    }
    Err(Error::Convergence(format!(
        "brent exceeded {} iterations",
        tol.max_iter
    )))
}

/// Grows `hi` geometrically until `pred(hi)` holds.
pub(crate) fn expand_upper<F>(mut hi: f64, mut pred: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<bool>,
{
    for _ in 0..200 {
        if pred(hi)? {
            return Ok(hi);
        }
        hi *= 2.0;
    }
    Err(Error::Convergence("could not bracket root".into()))
}
