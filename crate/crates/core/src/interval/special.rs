//! Rigorous enclosures of the standard normal density, distribution function and quantile.

use super::arith::Interval;
use crate::error::{Error, Result};
use crate::gaussian::{std_normal_quantile_ext, INV_SQRT_2PI};

/// Beyond this |x| the Mills-ratio continued fraction replaces the power series.
const SERIES_LIMIT: f64 = 3.0;
const MAX_CF_DEPTH: usize = 4000;

fn inv_sqrt_2pi() -> Interval {
    Interval::around(INV_SQRT_2PI)
}

/// φ over an interval.
pub fn i_pdf(x: Interval) -> Interval {
    let e = (x.sqr() * -0.5).exp();
    inv_sqrt_2pi() * e
}

/// ∫₀ˣ e^{-u²/2} du · e^{x²/2} = Σ x^{2n+1}/(2n+1)!!, with a geometric tail bound.
fn odd_series(x: f64) -> Interval {
    let xi = Interval::point(x);
    let x2 = xi.sqr();
    let mut term = xi;
    let mut sum = xi;
    let mut n = 0usize;
    loop {
        n += 1;
        term = term * x2 / Interval::point((2 * n + 1) as f64);
        sum = sum + term;
        let ratio = x * x / (2 * n + 3) as f64;
        if ratio < 0.5 && term.mag() <= 1e-20 * sum.mag().max(1e-300) {
            let next = term.mag() * x2.hi / (2 * n + 3) as f64;
            let tail = Interval::point(next) / Interval::point(1.0 - ratio);
            let tail = Interval { lo: 0.0, hi: tail.hi };
            return if x > 0.0 { sum + tail } else { sum - tail };
        }
    }
}

/// Q(x)/φ(x) for x > 0 from consecutive convergents of Laplace's continued fraction,
/// which alternate around the true value.
fn mills_ratio(x: f64) -> Interval {
    let xi = Interval::point(x);
    let convergent = |depth: usize| {
        let mut t = xi;
        for k in (1..=depth).rev() {
            t = xi + Interval::point(k as f64) / t;
        }
        Interval::point(1.0) / t
    };
    let mut depth = 16;
    loop {
        let a = convergent(depth);
        let b = convergent(depth + 1);
        let h = a.hull(b);
        if h.width() <= 1e-17 * h.lo || depth >= MAX_CF_DEPTH {
            return h;
        }
        depth *= 2;
    }
}

/// Enclosure of Φ at a point; exact at ±∞.
pub fn phi_point(x: f64) -> Interval {
    if x == f64::NEG_INFINITY {
        return Interval::point(0.0);
    }
    if x == f64::INFINITY {
        return Interval::point(1.0);
    }
    let unit = Interval { lo: 0.0, hi: 1.0 };
    let out = if x.abs() <= SERIES_LIMIT {
        Interval::point(0.5) + i_pdf(Interval::point(x)) * odd_series(x)
    } else {
        let tail = i_pdf(Interval::point(x)) * mills_ratio(x.abs());
        if x < 0.0 { tail } else { Interval::point(1.0) - tail }
    };
    out.clip(unit)
}

/// Φ over an interval, from the monotone endpoints.
pub fn i_phi(x: Interval) -> Interval {
    Interval { lo: phi_point(x.lo).lo, hi: phi_point(x.hi).hi }
}

/// A number certainly ≤ Φ⁻¹(p).
pub fn quantile_lower(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let mut x = std_normal_quantile_ext(p);
    let mut step = 4e-16 * x.abs().max(1.0);
    for _ in 0..200 {
        if phi_point(x).hi <= p {
            return x;
        }
        x -= step;
        step *= 2.0;
    }
    f64::NEG_INFINITY
}

/// A number certainly ≥ Φ⁻¹(p).
pub fn quantile_upper(p: f64) -> f64 {
    -quantile_lower_neg(p)
}

/// Φ⁻¹(p) ≤ −y  ⟺  Φ(y) ≤ 1 − p; searched directly to avoid forming 1 − p.
fn quantile_lower_neg(p: f64) -> f64 {
    if p >= 1.0 {
        return f64::NEG_INFINITY;
    }
    if p <= 0.0 {
        return f64::INFINITY;
    }
    let mut x = std_normal_quantile_ext(p);
    let mut step = 4e-16 * x.abs().max(1.0);
    for _ in 0..200 {
        if phi_point(x).lo >= p {
            return -x;
        }
        x += step;
        step *= 2.0;
    }
    f64::NEG_INFINITY
}

/// Φ⁻¹ over p ⊂ [0, 1], with 0 ↦ −∞ and 1 ↦ +∞.
pub fn i_phi_inv_ext(p: Interval) -> Interval {
    Interval { lo: quantile_lower(p.lo), hi: quantile_upper(p.hi) }
}

/// Φ⁻¹ over p ⊂ (0, 1).
pub fn i_phi_inv(p: Interval) -> Result<Interval> {
    if !(p.lo > 0.0 && p.hi < 1.0) {
        return Err(Error::Domain(format!("quantile interval [{}, {}] not inside (0, 1)", p.lo, p.hi)));
    }
    Ok(i_phi_inv_ext(p))
}
