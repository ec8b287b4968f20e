//! Complex Gaussian matrices, Hermitian helpers and the Wishart statistics
//! used by the GLRT performance curves.

mod eigcdf;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::specfun::{noncentral_chi2_sf, ChiSquareSpec, Probability};

pub use eigcdf::{
    calibrate_eig_cdf_params, fit_moments, scaled_max_eig_cdf, scaled_max_eig_cdf_closed_form,
    scaled_max_eig_quantile, scaled_max_eig_ratio, EigCdfParams,
};

/// Dense complex matrix in signal units.
pub type ComplexMatrix = DMatrix<Complex64>;

/// Fills `out` with i.i.d. `CN(0, variance)` entries added on top of its
/// current contents.
pub fn add_complex_noise<R: Rng + ?Sized>(out: &mut ComplexMatrix, variance: f64, rng: &mut R) {
    let sd = (0.5 * variance).sqrt();
    for z in out.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        z.re += sd * re;
        z.im += sd * im;
    }
}

/// Draws a `rows × cols` matrix with i.i.d. circularly-symmetric complex
/// Gaussian entries around `mean`. Each entry has total variance `variance`,
/// split equally between real and imaginary parts.
pub fn sample_complex_gaussian<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    mean: &ComplexMatrix,
    variance: f64,
    rng: &mut R,
) -> Result<ComplexMatrix> {
    if mean.nrows() != rows || mean.ncols() != cols {
        return Err(Error::DimensionMismatch(format!(
            "mean is {}x{}, expected {rows}x{cols}",
            mean.nrows(),
            mean.ncols()
        )));
    }
    if !(variance > 0.0) {
        return Err(Error::Domain(format!("variance must be positive, got {variance}")));
    }
    let mut out = mean.clone();
    add_complex_noise(&mut out, variance, rng);
    Ok(out)
}

/// `rows × cols` matrix of i.i.d. `CN(0, 1)` entries.
pub fn standard_complex_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(rows, cols);
    add_complex_noise(&mut out, 1.0, rng);
    out
}

/// `‖A‖_F² = Tr{AᴴA}`.
pub fn frobenius_sq(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// `Re Tr{AᴴB}`.
pub fn inner_re(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

/// Gram matrix `A Aᴴ`.
pub fn gram(a: &ComplexMatrix) -> ComplexMatrix {
    a * a.adjoint()
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted in
/// descending order; eigenvectors are the matching columns.
pub fn hermitian_eigen(a: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let eig = SymmetricEigen::new(a.clone());
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Eigenvalues of a Hermitian matrix, descending.
pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(a.clone()).eigenvalues.iter().copied().collect();
    v.sort_by(|x, y| y.total_cmp(x));
    v
}

/// Effective correlation `Ψ = I + M^{-1} M_E M_Eᴴ` of the central Wishart
/// surrogate for a noncentral Wishart with mean `m_e` (`N_b × M`).
pub fn effective_correlation(m_e: &ComplexMatrix) -> ComplexMatrix {
    let samples = m_e.ncols() as f64;
    let mut psi = gram(m_e) / Complex64::new(samples, 0.0);
    for i in 0..psi.nrows() {
        psi[(i, i)] += Complex64::new(1.0, 0.0);
    }
    psi
}

/// Survival function of `Tr{XXᴴ}` for `X` with i.i.d. complex Gaussian
/// entries of variance `σ²` and mean `M`.
///
/// With white noise the trace is exactly `(σ²/2)·χ'²_{2MN}(2‖M‖²/σ²)`, so the
/// weighted chi-square series for general covariances reduces to its first
/// term and this simply delegates to the noncentral chi-square.
pub fn wishart_trace_sf(spec: &ChiSquareSpec, x: f64) -> Result<Probability> {
    noncentral_chi2_sf(spec, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn degenerate_variance_returns_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mean = ComplexMatrix::from_fn(3, 5, |i, j| Complex64::new(i as f64, -(j as f64)));
        let y = sample_complex_gaussian(3, 5, &mean, 1e-30, &mut rng).unwrap();
        let dev = (&y - &mean).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(dev < 1e-10);
    }

    #[test]
    fn dimension_mismatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mean = ComplexMatrix::zeros(2, 2);
        assert!(sample_complex_gaussian(2, 3, &mean, 1.0, &mut rng).is_err());
        assert!(sample_complex_gaussian(2, 2, &mean, 0.0, &mut rng).is_err());
    }

    #[test]
    fn sample_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100_000;
        let zero = ComplexMatrix::zeros(2, 2);
        let mut sum = ComplexMatrix::zeros(2, 2);
        let mut sq = [0.0f64; 4];
        for _ in 0..n {
            let x = sample_complex_gaussian(2, 2, &zero, 1.0, &mut rng).unwrap();
            sum += &x;
            for (acc, z) in sq.iter_mut().zip(x.iter()) {
                *acc += z.norm_sqr();
            }
        }
        for z in sum.iter() {
            assert!((z / n as f64).norm() < 0.02);
        }
        for v in sq {
            assert!((v / n as f64 - 1.0).abs() < 0.02);
        }
    }

    #[test]
    fn eigenvalues_descending() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = standard_complex_gaussian(4, 9, &mut rng);
        let w = gram(&x);
        let (vals, vecs) = hermitian_eigen(&w);
        assert!(vals.windows(2).all(|p| p[0] >= p[1]));
        let v0 = vecs.column(0).into_owned();
        let wv = &w * &v0;
        let resid = (&wv - v0 * Complex64::new(vals[0], 0.0)).norm();
        assert!(resid < 1e-10 * vals[0]);
    }

    #[test]
    fn psi_smallest_eigenvalue_at_least_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let m_e = standard_complex_gaussian(4, 32, &mut rng);
            let psi = effective_correlation(&m_e);
            let herm_err = (&psi - psi.adjoint()).norm();
            assert!(herm_err < 1e-12);
            let vals = hermitian_eigenvalues(&psi);
            assert!(*vals.last().unwrap() >= 1.0 - 1e-12);
        }
    }

    #[test]
    fn central_trace_matches_gamma() {
        let (m, nb, sigma2) = (64u64, 2u64, 1.7);
        let spec = ChiSquareSpec::complex_energy(m * nb, sigma2, 0.0).unwrap();
        for &x in &[50.0, 128.0 * 1.7, 300.0] {
            let sf = wishart_trace_sf(&spec, x).unwrap().get();
            let want = 1.0 - crate::specfun::reg_gamma_p((m * nb) as f64, x / sigma2).unwrap();
            assert!((sf - want).abs() < 1e-10);
        }
    }
}
