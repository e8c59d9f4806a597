//! Physical constants and the information-theoretic / statistical helpers
//! shared by every rate computation.
//!
//! Rates are reported in bits per channel use, so entropies use base-2
//! logarithms; natural logarithms only appear inside concentration bounds.

use libm::{erfc, exp, log, log2, sqrt};

use crate::{Error, Result};

/// CODATA 2018 exact values, plus the mean Earth radius used by the
/// slant-range geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// J s
    pub planck_constant: f64,
    /// J / K
    pub boltzmann_constant: f64,
    /// m / s
    pub speed_of_light: f64,
    /// km
    pub earth_radius: f64,
}

pub const CONSTANTS: PhysicalConstants = PhysicalConstants {
    planck_constant: 6.626_070_15e-34,
    boltzmann_constant: 1.380_649e-23,
    speed_of_light: 299_792_458.0,
    earth_radius: EARTH_RADIUS_KM,
};

pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Symplectic eigenvalues within this distance below 1 are rounding noise
/// from the covariance algebra and are snapped to exactly 1.
pub const SYMPLECTIC_CLAMP_TOL: f64 = 1e-12;

/// Binary Shannon entropy `h(p)` in bits, with `h(0) = h(1) = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain {
            quantity: "probability",
            value: p,
        });
    }
    Ok(binary_entropy_unchecked(p))
}

/// `h(p)` after clamping `p` into `[0, 1]`. Finite-size shifts can push
/// estimated error rates slightly outside the unit interval.
pub(crate) fn binary_entropy_unchecked(p: f64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    if p == 0.0 || p == 1.0 {
        return 0.0;
    }
    -p * log2(p) - (1.0 - p) * log2(1.0 - p)
}

/// Von Neumann entropy (bits) of a single-mode thermal state whose
/// symplectic eigenvalue is `nu` (vacuum: `nu = 1`).
pub fn bosonic_entropy(nu: f64) -> Result<f64> {
    if !(nu >= 1.0 - SYMPLECTIC_CLAMP_TOL) {
        return Err(Error::NonPhysicalCovariance { eigenvalue: nu });
    }
    if nu <= 1.0 {
        return Ok(0.0);
    }
    let plus = (nu + 1.0) / 2.0;
    let minus = (nu - 1.0) / 2.0;
    Ok(plus * log2(plus) - minus * log2(minus))
}

/// Bit-error rate of a sign decision on a Gaussian variable whose mean is
/// `snr_amplitude` standard deviations away from the threshold.
pub fn gaussian_tail_ber(snr_amplitude: f64) -> Result<f64> {
    if !(snr_amplitude >= 0.0) {
        return Err(Error::Domain {
            quantity: "snr amplitude",
            value: snr_amplitude,
        });
    }
    Ok(0.5 * erfc(snr_amplitude / core::f64::consts::SQRT_2))
}

/// Inverse of [`gaussian_tail_ber`]: the amplitude (in standard deviations)
/// needed to reach the given bit-error rate. `ber >= 0.5` needs none.
pub fn gaussian_tail_ber_inverse(ber: f64) -> Result<f64> {
    if !(ber > 0.0 && ber <= 1.0) {
        return Err(Error::Domain {
            quantity: "bit-error rate",
            value: ber,
        });
    }
    if ber >= 0.5 {
        return Ok(0.0);
    }
    let mut x = normal_quantile_upper(ber);
    // Halley steps on ln Q(x) - ln ber; Q'(x) = -phi(x).
    for _ in 0..3 {
        let q = 0.5 * erfc(x / core::f64::consts::SQRT_2);
        if q <= 0.0 {
            break;
        }
        let phi = exp(-0.5 * x * x) / sqrt(2.0 * core::f64::consts::PI);
        let f = log(q) - log(ber);
        let d1 = -phi / q;
        let d2 = x * phi / q - d1 * d1;
        let step = f / d1 / (1.0 - 0.5 * f * d2 / (d1 * d1));
        x -= step;
        if libm::fabs(step) < 1e-15 * x.max(1.0) {
            break;
        }
    }
    Ok(x.max(0.0))
}

/// Acklam's rational approximation of the upper-tail standard normal
/// quantile, relative error ~1e-9; used as the starting point above.
fn normal_quantile_upper(p: f64) -> f64 {
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
    // lower-tail quantile of p, negated
    let lower = if p < 0.02425 {
        let q = sqrt(-2.0 * log(p));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    -lower
}

/// Hoeffding deviation `sqrt(n ln(1/eps) / 2)` for a sum of `n_samples`
/// bounded trials at failure probability `epsilon`.
pub fn hoeffding_delta(n_samples: f64, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain {
            quantity: "failure probability",
            value: epsilon,
        });
    }
    if !(n_samples >= 0.0) {
        return Err(Error::Domain {
            quantity: "sample count",
            value: n_samples,
        });
    }
    Ok(sqrt(n_samples * log(1.0 / epsilon) / 2.0))
}
