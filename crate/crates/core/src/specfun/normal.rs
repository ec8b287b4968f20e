//! Standard normal tail probability and its inverse.

use super::Probability;
use crate::error::{domain, Result};

/// `Q(x) = Pr{N(0,1) > x}`.
pub fn gaussian_q(x: f64) -> Probability {
    Probability::clamped(0.5 * libm::erfc(x / std::f64::consts::SQRT_2))
}

/// Inverse of [`gaussian_q`] on the open unit interval.
pub fn gaussian_q_inverse(p: Probability) -> Result<f64> {
    let p = p.get();
    if p <= 0.0 || p >= 1.0 {
        return domain(format!("inverse Gaussian tail needs 0 < p < 1, got {p}"));
    }
    // Q^{-1}(p) = Φ^{-1}(1 - p) = -Φ^{-1}(p); refine Φ^{-1}(p) in the
    // lower tail, where p itself carries the precision.
    let mut z = acklam_lower(p);
    for _ in 0..3 {
        let e = 0.5 * libm::erfc(-z / std::f64::consts::SQRT_2) - p;
        let u = e * (2.0 * std::f64::consts::PI).sqrt() * (0.5 * z * z).exp();
        z -= u / (1.0 + 0.5 * z * u);
    }
    Ok(-z)
}

// Acklam's rational approximation of Φ^{-1}, relative error ~1e-9.
fn acklam_lower(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (-p).ln_1p()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}
