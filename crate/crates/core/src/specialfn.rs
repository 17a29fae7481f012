//! Scalar special functions: normal CDF/quantile, Lambert W, regularized
//! incomplete beta and gamma.

use serde::{Deserialize, Serialize};
use statrs::function::{beta, gamma};

use crate::error::{domain, Result};

/// Real branch of the Lambert W function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    /// W₀, defined on [-1/e, ∞), values ≥ -1.
    Principal,
    /// W₋₁, defined on [-1/e, 0), values ≤ -1.
    Minus1,
}

const INV_E: f64 = 0.367_879_441_171_442_33;
const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
pub fn std_normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal CDF Φ(x).
pub fn std_normal_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Inverse of Φ on (0, 1).
///
/// Rational approximation (Acklam) followed by one Halley refinement step.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("normal quantile requires p in (0,1), got {p}"));
    }
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
    const P_LOW: f64 = 0.024_25;

    let x = if p < P_LOW {
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
    };

    // Halley step. The residual is taken on the smaller tail to keep precision.
    let e = if x <= 0.0 {
        std_normal_cdf(x) - p
    } else {
        (1.0 - p) - std_normal_cdf(-x)
    };
    let u = e / std_normal_pdf(x);
    Ok(x - u / (1.0 + 0.5 * x * u))
}

/// Real Lambert W: solves w·eʷ = x on the requested branch.
pub fn lambert_w(branch: Branch, x: f64) -> Result<f64> {
    if x.is_nan() {
        return domain("lambert_w of NaN");
    }
    let branch_point = -INV_E;
    match branch {
        Branch::Principal if x < branch_point - 1e-16 => {
            return domain(format!("W0 requires x >= -1/e, got {x}"))
        }
        Branch::Minus1 if !(x >= branch_point - 1e-16 && x < 0.0) => {
            return domain(format!("W-1 requires -1/e <= x < 0, got {x}"))
        }
        _ => {}
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    // ex + 1 computed with the split constant to keep precision near -1/e.
    let q = x + INV_E;
    if q <= 0.0 {
        return Ok(-1.0);
    }
    let p = (2.0 * std::f64::consts::E * q).sqrt();

    let mut w = match branch {
        Branch::Principal => {
            if q < 0.3 {
                -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
            } else if x < 3.0 {
                0.5 * x.ln_1p()
            } else {
                let l1 = x.ln();
                let l2 = l1.ln();
                l1 - l2 + l2 / l1
            }
        }
        Branch::Minus1 => {
            if q < 0.3 {
                -1.0 - p - p * p / 3.0 - 11.0 / 72.0 * p * p * p
            } else {
                let l1 = (-x).ln();
                let l2 = (-l1).ln();
                l1 - l2 + l2 / l1
            }
        }
    };

    for _ in 0..50 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        w -= step;
        if step.abs() <= 1e-15 * (1.0 + w.abs()) {
            break;
        }
    }
    match branch {
        Branch::Principal => Ok(w.max(-1.0)),
        Branch::Minus1 => Ok(w.min(-1.0)),
    }
}

/// Regularized incomplete beta Iₓ(a, b).
pub fn reg_inc_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) || !(a > 0.0) || !(b > 0.0) {
        return domain(format!("reg_inc_beta({x}, {a}, {b}) outside domain"));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    Ok(beta::beta_reg(a, b, x).clamp(0.0, 1.0))
}

/// Regularized upper incomplete gamma Q(s, x).
pub fn reg_gamma_q(s: f64, x: f64) -> Result<f64> {
    if !(s > 0.0) || !(x >= 0.0) {
        return domain(format!("reg_gamma_q({s}, {x}) outside domain"));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(gamma::gamma_ur(s, x).clamp(0.0, 1.0))
}

/// Natural log of the gamma function.
pub fn ln_gamma(x: f64) -> f64 {
    gamma::ln_gamma(x)
}
