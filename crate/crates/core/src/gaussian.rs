//! Gaussian special functions, quadrant probabilities and the critical constants.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use crate::error::{Error, Result};

/// 1/√(2π).
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Truncation point (in standard deviations) for the quadrant integral.
pub const TAIL_CUTOFF: f64 = 8.5;

/// A correlation coefficient in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Correlation(f64);

impl Correlation {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && (-1.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(Error::Domain(format!("correlation {value} outside [-1, 1]")))
        }
    }

    /// Clamps into `[-1, 1]`; NaN maps to 0.
    pub fn clamped(value: f64) -> Self {
        if value.is_nan() {
            Self(0.0)
        } else {
            Self(value.clamp(-1.0, 1.0))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Correlation {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

pub fn std_normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Φ(x), accurate to a few ulps through `erfc`.
pub fn std_normal_cdf(x: f64) -> f64 {
    if x == f64::INFINITY {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Φ⁻¹(p) for p in (0, 1).
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("quantile argument {p} not in (0, 1)")));
    }
    Ok(quantile_interior(p))
}

/// Φ⁻¹ extended to the closed interval: 0 maps to -∞ and 1 to +∞.
pub fn std_normal_quantile_ext(p: f64) -> f64 {
    if p <= 0.0 {
        f64::NEG_INFINITY
    } else if p >= 1.0 {
        f64::INFINITY
    } else {
        quantile_interior(p)
    }
}

fn quantile_interior(p: f64) -> f64 {
    if p == 0.5 {
        return 0.0;
    }
    if p > 0.5 {
        // 1 - p is exact here, so the reflection is exact too.
        return -quantile_lower(1.0 - p);
    }
    quantile_lower(p)
}

fn quantile_lower(p: f64) -> f64 {
    let mut x = acklam_guess(p);
    for _ in 0..2 {
        let density = std_normal_pdf(x);
        if density <= 0.0 {
            break;
        }
        x -= (std_normal_cdf(x) - p) / density;
    }
    x
}

// Rational approximation with relative error about 1e-9, polished by Newton.
fn acklam_guess(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383_577_518_672_69e2,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    if p < 0.02425 {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// Φ_ρ(x, y) = Pr[g₁ ≤ x, g₂ ≤ y] for ρ-correlated standard Gaussians.
///
/// Exactly symmetric in (x, y).
pub fn bvn_cdf(rho: f64, x: f64, y: f64) -> f64 {
    let (x, y) = if x <= y { (x, y) } else { (y, x) };
    if x == f64::NEG_INFINITY || y == f64::NEG_INFINITY {
        return 0.0;
    }
    if y == f64::INFINITY {
        return std_normal_cdf(x);
    }
    if rho >= 1.0 {
        return std_normal_cdf(x);
    }
    if rho <= -1.0 {
        return (std_normal_cdf(x) + std_normal_cdf(y) - 1.0).max(0.0);
    }
    if rho == 0.0 {
        return std_normal_cdf(x) * std_normal_cdf(y);
    }
    if rho > 0.0 {
        return (std_normal_cdf(x) - bvn_cdf_nonpositive(-rho, x, -y)).clamp(0.0, 1.0);
    }
    bvn_cdf_nonpositive(rho, x, y)
}

/// Φ_ρ for ρ ∈ (−1, 0): the lower Fréchet bound plus ∫₀^√(1+ρ) g(u) du with
/// g(u) = exp(−(x+y)²/(2u²(2−u²)) + xy/(2−u²)) / (π√(2−u²)).
fn bvn_cdf_nonpositive(rho: f64, x: f64, y: f64) -> f64 {
    let floor = (std_normal_cdf(x) + std_normal_cdf(y) - 1.0).max(0.0);
    let top = (1.0 + rho).sqrt();
    let sum = x + y;
    let prod = x * y;
    let integrand = |u: f64| {
        if u <= 0.0 {
            return if sum == 0.0 { (0.5 * prod).exp() / (PI * SQRT_2) } else { 0.0 };
        }
        let rest = 2.0 - u * u;
        (-(sum * sum) / (2.0 * u * u * rest) + prod / rest).exp() / (PI * rest.sqrt())
    };
    (floor + adaptive_gauss_kronrod(&integrand, 0.0, top, 1e-16)).clamp(0.0, 1.0)
}

/// Λ_ρ(μ₁, μ₂): quadrant probability with thresholds given as Gaussian measures.
pub fn bvn_quadrant(rho: Correlation, mu1: f64, mu2: f64) -> f64 {
    let (mu1, mu2) = (mu1.clamp(0.0, 1.0), mu2.clamp(0.0, 1.0));
    let rho = rho.value();
    if mu1 == 0.0 || mu2 == 0.0 {
        return 0.0;
    }
    if mu1 == 1.0 {
        return mu2;
    }
    if mu2 == 1.0 {
        return mu1;
    }
    if rho == 0.0 {
        return mu1 * mu2;
    }
    if rho >= 1.0 {
        return mu1.min(mu2);
    }
    if rho <= -1.0 {
        return (mu1 + mu2 - 1.0).max(0.0);
    }
    bvn_cdf(rho, quantile_interior(mu1), quantile_interior(mu2))
}

/// ∂Λ_ρ(μ₁, μ₂)/∂μ₁ = Φ(K(μ₁, μ₂)) for |ρ| < 1 and interior μ.
pub fn bvn_quadrant_dmu1(rho: Correlation, mu1: f64, mu2: f64) -> Result<f64> {
    Ok(std_normal_cdf(k_func(rho, mu1, mu2)?))
}

/// Probability that halfspaces of measures μ₁, μ₂ separate a ρ-correlated pair.
pub fn gaussian_cut(rho: Correlation, mu1: f64, mu2: f64) -> f64 {
    1.0 - co_cut(rho, mu1, mu2)
}

/// 1 − Cut_ρ(μ₁, μ₂) = Λ_ρ(μ₁, μ₂) + Λ_ρ(1−μ₁, 1−μ₂).
pub fn co_cut(rho: Correlation, mu1: f64, mu2: f64) -> f64 {
    let a = bvn_quadrant(rho, mu1, mu2);
    let b = bvn_quadrant(rho, 1.0 - mu1, 1.0 - mu2);
    // Fixed summation order keeps the complement symmetry exact.
    a.min(b) + a.max(b)
}

/// G(z) = Φ(z) − Φ(−z) = erf(z/√2).
pub fn g_func(z: f64) -> f64 {
    libm::erf(z / SQRT_2)
}

/// K(x, y) = (Φ⁻¹(y) − ρ Φ⁻¹(x)) / √(1−ρ²).
pub fn k_func(rho: Correlation, x: f64, y: f64) -> Result<f64> {
    let r = rho.value();
    if r.abs() >= 1.0 {
        return Err(Error::Domain("K is undefined at |rho| = 1".into()));
    }
    let tx = std_normal_quantile(x)?;
    let ty = std_normal_quantile(y)?;
    Ok((ty - r * tx) / ((1.0 - r) * (1.0 + r)).sqrt())
}

/// The constants that fix the algorithm and its analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalConstants {
    pub rho_star: f64,
    pub alpha_gw: f64,
    pub c_star: f64,
    pub s_star: f64,
    pub alpha_star: f64,
    pub b_star: f64,
    pub p_star: f64,
    pub q_star: f64,
}

/// Ratio minimised by the critical correlation.
pub fn gw_ratio(rho: f64) -> f64 {
    2.0 * rho.acos() / (PI * (1.0 - rho))
}

/// Sign of d/dρ of [`gw_ratio`] (up to a positive factor).
fn gw_ratio_slope(rho: f64) -> f64 {
    rho.acos() - ((1.0 - rho) / (1.0 + rho)).sqrt()
}

pub fn compute_critical_constants() -> CriticalConstants {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (-0.99, -0.1);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (gw_ratio(c), gw_ratio(d));
    while b - a > 1e-7 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = gw_ratio(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = gw_ratio(d);
        }
    }
    // Polish on the sign of the derivative, which is negative left of the minimum.
    let (mut lo, mut hi) = (a - 1e-6, b + 1e-6);
    debug_assert!(gw_ratio_slope(lo) < 0.0 && gw_ratio_slope(hi) > 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gw_ratio_slope(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let rho_star = 0.5 * (lo + hi);
    let c_star = (1.0 - rho_star) / 2.0;
    let s_star = rho_star.acos() / PI;
    let alpha_star = 2.0 * rho_star / (rho_star - 1.0);
    let b_star = (1.0 + rho_star) / (1.0 - rho_star);
    let (p_star, q_star) = crate::rounding::pq_constants(b_star);
    CriticalConstants {
        rho_star,
        alpha_gw: s_star / c_star,
        c_star,
        s_star,
        alpha_star,
        b_star,
        p_star,
        q_star,
    }
}

// Gauss-Kronrod (7, 15) abscissae and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let sum = f(centre - dx) + f(centre + dx);
        kronrod += WGK[j] * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive G7K15 quadrature to an absolute tolerance.
pub fn adaptive_gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let length = b - a;
    if length <= 0.0 {
        return 0.0;
    }
    let mut total = 0.0;
    let mut stack = vec![(a, b, 0u32)];
    while let Some((lo, hi, depth)) = stack.pop() {
        let (value, err) = gk15(f, lo, hi);
        let budget = tol * (hi - lo) / length;
        if err <= budget.max(1e-17) || depth >= 50 {
            total += value;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    total
}
