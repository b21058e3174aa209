//! Standard normal special functions and the universal regret constants.
//!
//! The worst-case expected regret of a thresholded difference-in-means rule
//! in one group is `se * t * sf(t)` with `t = |tau| / se`. Its maximizer
//! `t*` and maximum `C0 = t* sf(t*)` scale every closed-form regret in the
//! crate, so they are solved for once and memoized.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::OnceLock;

use crate::error::{Error, Result};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal CDF `Phi(x)`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail `1 - Phi(x)`, evaluated directly so that it keeps full
/// relative precision for large `x`.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

// Acklam's rational approximation; relative error about 1.15e-9 before
// refinement.
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

fn acklam(p: f64) -> f64 {
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
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Standard normal quantile `Z_p`, i.e. the `x` with `Phi(x) = p`.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!(
            "quantile probability must lie in (0, 1), got {p}"
        )));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    let mut x = acklam(p);
    // Halley steps on Phi(x) - p. The residual is formed from the tail that
    // is small so it does not cancel.
    for _ in 0..2 {
        let resid = if x < 0.0 {
            normal_cdf(x) - p
        } else {
            (1.0 - p) - normal_sf(x)
        };
        let u = resid * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
        x -= u / (1.0 + 0.5 * x * u);
    }
    Ok(x)
}

/// Maximizer and maximum of `t * sf(t)` over `t >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdConstants {
    /// Root of `t * pdf(t) = sf(t)`.
    pub t_star: f64,
    /// `t_star * sf(t_star)`.
    pub c0: f64,
}

const BRACKET: (f64, f64) = (0.5, 1.0);

fn stationarity(t: f64) -> f64 {
    t * normal_pdf(t) - normal_sf(t)
}

/// Solves `t * pdf(t) = sf(t)` by bisection on `[0.5, 1.0]`, where the
/// left side minus the right side changes sign exactly once.
pub fn solve_threshold_constants(tolerance: f64) -> Result<ThresholdConstants> {
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(Error::domain(format!(
            "root tolerance must be positive, got {tolerance}"
        )));
    }
    let (mut lo, mut hi) = BRACKET;
    let mut f_lo = stationarity(lo);
    debug_assert!(f_lo < 0.0 && stationarity(hi) > 0.0);
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = stationarity(mid);
        if f_mid == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let t_star = 0.5 * (lo + hi);
    Ok(ThresholdConstants {
        t_star,
        c0: t_star * normal_sf(t_star),
    })
}

/// Process-wide constants, solved on first use.
pub fn threshold_constants() -> ThresholdConstants {
    static CONSTANTS: OnceLock<ThresholdConstants> = OnceLock::new();
    *CONSTANTS.get_or_init(|| solve_threshold_constants(1e-15).expect("positive tolerance"))
}

/// Shorthand for `threshold_constants().c0`.
pub fn c0() -> f64 {
    threshold_constants().c0
}
