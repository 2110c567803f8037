//! Rigorous enclosure of the bivariate normal distribution function.
//!
//! For ρ ∈ [−1, 0] we integrate the density in the correlation:
//! Φ_ρ(x, y) = max(0, Φ(x) + Φ(y) − 1) + ∫₀^√(1+ρ) g(u) du with
//! g(u) = exp(−(x+y)²/(2u²(2−u²)) + xy/(2−u²)) / (π√(2−u²)),
//! obtained from ∂Φ_ρ/∂ρ = φ_ρ(x, y) and the substitution ρ = u² − 1.
//! The integral is split into panels and each panel is bounded by a Taylor
//! polynomial of order `ORDER − 1` plus an interval Lagrange remainder.
//! Positive ρ is reflected through Φ_ρ(x, y) = Φ(x) − Φ_{−ρ}(x, −y).

use super::arith::{Interval, PI_I};
use super::special::phi_point;
use super::taylor::Series;
use crate::error::{Error, Result};

/// Taylor order of the panel rule; must be even.
const ORDER: usize = 16;
/// Default absolute width per unit length aimed at for the integral part.
pub const BVN_TOL: f64 = 1e-13;
const MAX_PANEL_DEPTH: u32 = 40;
/// Panels are accepted once their width is within this factor of their magnitude.
const ROUNDING_FLOOR: f64 = 1e-14;
/// Integrate from ρ = 0 downwards when √(1+ρ) is at least this, else up from ρ = −1.
const UPPER_FORM_MIN: f64 = 0.3;
/// Widest panel used to seed the adaptive split away from u = 0.
const SEED_WIDTH: f64 = 0.125;

/// Product of two series supported on their first three coefficients.
fn sparse_product(a: &[Interval], b: &[Interval], order: usize) -> Series {
    let mut out = Series::constant(Interval::point(0.0), order);
    for i in 0..3 {
        for j in 0..3 {
            if i + j <= order {
                out.0[i + j] = out.0[i + j] + a[i] * b[j];
            }
        }
    }
    out
}

/// Taylor coefficients of g at `at`, built as exp(P/w − S²/(2u²w) − ½ ln w)/π with w = 2 − u².
fn integrand_series(at: Interval, order: usize, s2: Interval, p: Interval, singular: bool) -> Series {
    let c2 = at.sqr();
    let mut w = Series::constant(Interval::point(2.0) - c2, order);
    if order >= 1 {
        w.0[1] = at * -2.0;
    }
    if order >= 2 {
        w.0[2] = Interval::point(-1.0);
    }
    let mut exponent = w.recip_sparse(3).scale(p);
    if singular {
        let u2 = [c2, at * 2.0, Interval::point(1.0)];
        let wq = [w.0[0], at * -2.0, Interval::point(-1.0)];
        let d = sparse_product(&u2, &wq, order);
        exponent = exponent.add(&d.recip_sparse(5).scale(s2 * -0.5));
    }
    exponent = exponent.sub(&w.ln_quadratic().scale(Interval::point(0.5)));
    exponent.exp().scale(Interval::point(1.0) / PI_I)
}

/// ∫_a^b g enclosed by the Taylor model at the panel midpoint.
fn panel(a: f64, b: f64, s2: Interval, p: Interval, singular: bool) -> Interval {
    let m = a + 0.5 * (b - a);
    let centre = integrand_series(Interval::point(m), ORDER - 1, s2, p, singular);
    let whole = integrand_series(Interval { lo: a, hi: b }, ORDER, s2, p, singular);
    let dl = Interval::point(a) - Interval::point(m);
    let dr = Interval::point(b) - Interval::point(m);
    let (mut pl, mut pr) = (dl, dr);
    let mut sum = Interval::point(0.0);
    for k in 0..ORDER {
        let moment = (pr - pl) / ((k + 1) as f64);
        sum = sum + centre.0[k] * moment;
        pl = pl * dl;
        pr = pr * dr;
    }
    let moment = ((pr - pl) / ((ORDER + 1) as f64)).clip(Interval { lo: 0.0, hi: f64::INFINITY });
    let out = sum + whole.0[ORDER] * moment;
    Interval { lo: out.lo.max(0.0), hi: out.hi }
}

/// Upper bound of g on [0, u1] for u1 ≤ 1, from the monotonicity of each factor.
fn crude_sup(u1: f64, s2: Interval, p: Interval) -> f64 {
    let u = Interval::point(u1);
    let w = Interval::point(2.0) - u.sqr();
    let singular = (s2 * -0.5) / (u.sqr() * w);
    let inv_w = Interval { lo: 0.5, hi: (Interval::point(1.0) / w).hi };
    let exponent = Interval::point(singular.hi) + p * inv_w;
    let value = Interval::point(exponent.hi).exp() / (w.sqrt_or_nan() * PI_I);
    value.hi
}

/// Enclosure of ∫_a^b g for 0 ≤ a ≤ b ≤ 1.
fn integrate(s: Interval, p: Interval, a: f64, b: f64, tol: f64) -> Interval {
    if b <= a {
        return Interval::point(0.0);
    }
    let singular = !(s.lo == 0.0 && s.hi == 0.0);
    let s2 = s.sqr();
    let mut total = Interval::point(0.0);
    let mut seeds = Vec::new();
    let mut start = a;
    if singular && a == 0.0 {
        // Near u = 0 the integrand is flat to all orders; bound it crudely and
        // cover the rest with a geometric ladder of panels.
        let target = tol * b * 1e-2;
        let mut u1 = b;
        let mut bound = crude_sup(u1, s2, p);
        while bound * u1 > target && u1 > 1e-300 {
            u1 *= 0.5;
            bound = crude_sup(u1, s2, p);
        }
        total = Interval { lo: 0.0, hi: (Interval::point(bound) * Interval::point(u1)).hi };
        let mut lo = u1;
        while lo < b && lo < SEED_WIDTH {
            let hi = (1.25 * lo).min(b);
            seeds.push((lo, hi));
            lo = hi;
        }
        start = lo;
    }
    if start < b {
        let pieces = ((b - start) / SEED_WIDTH).ceil().max(1.0) as usize;
        let step = (b - start) / pieces as f64;
        for k in 0..pieces {
            let lo = start + step * k as f64;
            let hi = if k + 1 == pieces { b } else { start + step * (k + 1) as f64 };
            seeds.push((lo, hi));
        }
    }
    let mut stack: Vec<(f64, f64, u32)> = seeds.into_iter().rev().map(|(lo, hi)| (lo, hi, 0)).collect();
    while let Some((lo, hi, depth)) = stack.pop() {
        let enc = panel(lo, hi, s2, p, singular);
        // Below the rounding floor further splitting cannot help.
        let allowed = (tol * (hi - lo)).max(ROUNDING_FLOOR * enc.mag());
        let m = lo + 0.5 * (hi - lo);
        if enc.width() <= allowed || depth >= MAX_PANEL_DEPTH || m <= lo || m >= hi {
            total = total + enc;
        } else {
            stack.push((m, hi, depth + 1));
            stack.push((lo, m, depth + 1));
        }
    }
    total
}

/// Enclosure of Φ_ρ(x, y) at a point (ρ, x, y); infinite thresholds allowed.
pub fn bvn_point(rho: f64, x: f64, y: f64, tol: f64) -> Interval {
    let unit = Interval { lo: 0.0, hi: 1.0 };
    if x.is_nan() || y.is_nan() || rho.is_nan() {
        return unit;
    }
    if x == f64::NEG_INFINITY || y == f64::NEG_INFINITY {
        return Interval::point(0.0);
    }
    if x == f64::INFINITY {
        return phi_point(y);
    }
    if y == f64::INFINITY {
        return phi_point(x);
    }
    if rho >= 1.0 {
        return phi_point(x.min(y));
    }
    if rho > 0.0 {
        let v = phi_point(x) - bvn_point(-rho, x, -y, tol);
        return v.clip(unit);
    }
    let (fx, fy) = (phi_point(x), phi_point(y));
    let floor = (fx + fy - 1.0).max(Interval::point(0.0));
    let cap = Interval { lo: floor.lo, hi: fx.hi.min(fy.hi) };
    if rho <= -1.0 {
        return floor.clip(unit);
    }
    let limit = (Interval::point(1.0) + rho).sqrt_or_nan().clip(unit);
    let s = Interval::point(x) + Interval::point(y);
    let p = Interval::point(x) * Interval::point(y);
    let singular = !(s.lo == 0.0 && s.hi == 0.0);
    // Extra mass from the uncertain integration limit.
    let slack = if limit.hi > limit.lo {
        let sup = integrand_series(limit, 0, s.sqr(), p, singular).0[0].hi;
        let extra = (Interval::point(limit.hi) - Interval::point(limit.lo)) * Interval::point(sup);
        Interval { lo: 0.0, hi: extra.hi }
    } else {
        Interval::point(0.0)
    };
    let value = if limit.lo >= UPPER_FORM_MIN {
        fx * fy - integrate(s, p, limit.hi, 1.0, tol) - slack
    } else {
        floor + integrate(s, p, 0.0, limit.lo, tol) + slack
    };
    value.clip(unit).clip(cap)
}

/// A lower bound of Φ_ρ(x, y).
pub fn bvn_lower(rho: f64, x: f64, y: f64) -> f64 {
    bvn_point(rho, x, y, BVN_TOL).lo
}

/// An upper bound of Φ_ρ(x, y).
pub fn bvn_upper(rho: f64, x: f64, y: f64) -> f64 {
    bvn_point(rho, x, y, BVN_TOL).hi
}

/// Φ_ρ(x, y) over a box, using monotonicity in each argument.
pub fn i_bvn(rho: Interval, x: Interval, y: Interval) -> Result<Interval> {
    let rho = rho
        .intersect(Interval { lo: -1.0, hi: 1.0 })
        .map_err(|_| Error::Domain(format!("correlation [{}, {}] outside [-1, 1]", rho.lo, rho.hi)))?;
    Ok(Interval { lo: bvn_lower(rho.lo, x.lo, y.lo), hi: bvn_upper(rho.hi, x.hi, y.hi) })
}
