//! Closed intervals of doubles with outward rounding.
//!
//! Basic operations round in the outward direction exactly, using
//! error-free transformations (two-sum and fused multiply-add residuals).
//! Library transcendentals are widened by two ulps on each side.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// How outward rounding is realised; copied into certificate reports.
pub const ROUNDING_MODE: &str = "error-free-transform (basic ops), 2-ulp widening (libm)";

/// Results below this magnitude skip the residual tricks, which can be inexact
/// in the subnormal range, and are widened by an ulp instead.
const TINY: f64 = 1e-290;

fn widen_down(x: f64, ulps: u32) -> f64 {
    (0..ulps).fold(x, |v, _| v.next_down())
}

fn widen_up(x: f64, ulps: u32) -> f64 {
    (0..ulps).fold(x, |v, _| v.next_up())
}

/// Rounded sum and the sign of its rounding error.
fn sum_err(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    if !s.is_finite() {
        return (s, f64::NAN);
    }
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn add_down(a: f64, b: f64) -> f64 {
    let (s, e) = sum_err(a, b);
    if e.is_nan() {
        return s.next_down();
    }
    if e < 0.0 { s.next_down() } else { s }
}

fn add_up(a: f64, b: f64) -> f64 {
    let (s, e) = sum_err(a, b);
    if e.is_nan() {
        return s.next_up();
    }
    if e > 0.0 { s.next_up() } else { s }
}

/// Product with 0·∞ = 0, which is the right convention for interval endpoints.
fn mul_err(a: f64, b: f64) -> (f64, f64) {
    if a == 0.0 || b == 0.0 {
        return (0.0, 0.0);
    }
    let p = a * b;
    if !p.is_finite() || p.abs() < TINY {
        return (p, f64::NAN);
    }
    (p, a.mul_add(b, -p))
}

fn mul_down(a: f64, b: f64) -> f64 {
    let (p, e) = mul_err(a, b);
    if e.is_nan() || e < 0.0 { p.next_down() } else { p }
}

fn mul_up(a: f64, b: f64) -> f64 {
    let (p, e) = mul_err(a, b);
    if e.is_nan() || e > 0.0 { p.next_up() } else { p }
}

/// Quotient and the sign of (a/b − fl(a/b)).
fn div_err(a: f64, b: f64) -> (f64, f64) {
    if a == 0.0 && b != 0.0 {
        return (0.0, 0.0);
    }
    let q = a / b;
    if !q.is_finite() || q.abs() < TINY || !b.is_finite() {
        return (q, f64::NAN);
    }
    let r = (-q).mul_add(b, a);
    (q, if b > 0.0 { r } else { -r })
}

fn div_down(a: f64, b: f64) -> f64 {
    let (q, e) = div_err(a, b);
    if e.is_nan() || e < 0.0 { q.next_down() } else { q }
}

fn div_up(a: f64, b: f64) -> f64 {
    let (q, e) = div_err(a, b);
    if e.is_nan() || e > 0.0 { q.next_up() } else { q }
}

fn sqrt_down(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let r = x.sqrt();
    if !r.is_finite() || x < TINY {
        return r.next_down().max(0.0);
    }
    if (-r).mul_add(r, x) < 0.0 { r.next_down() } else { r }
}

fn sqrt_up(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let r = x.sqrt();
    if !r.is_finite() || x < TINY {
        return r.next_up();
    }
    if (-r).mul_add(r, x) > 0.0 { r.next_up() } else { r }
}

/// A closed interval [lo, hi]; endpoints may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 2]", try_from = "[f64; 2]")]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl From<Interval> for [f64; 2] {
    fn from(x: Interval) -> Self {
        [x.lo, x.hi]
    }
}

impl TryFrom<[f64; 2]> for Interval {
    type Error = Error;
    fn try_from(v: [f64; 2]) -> Result<Self> {
        Interval::new(v[0], v[1])
    }
}

/// Enclosure of π.
pub const PI_I: Interval = Interval { lo: PI, hi: PI.next_up() };

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::Domain(format!("invalid interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub const fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    pub const fn entire() -> Self {
        Self { lo: f64::NEG_INFINITY, hi: f64::INFINITY }
    }

    /// A correctly rounded constant, widened by one ulp each way.
    pub fn around(x: f64) -> Self {
        Self { lo: x.next_down(), hi: x.next_up() }
    }

    pub fn width(self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(self) -> f64 {
        if self.lo == f64::NEG_INFINITY || self.hi == f64::INFINITY {
            if self.lo.is_finite() {
                return self.lo;
            }
            if self.hi.is_finite() {
                return self.hi;
            }
            return 0.0;
        }
        self.lo + 0.5 * (self.hi - self.lo)
    }

    /// Largest absolute value.
    pub fn mag(self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn contains(self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(self) -> bool {
        self.contains(0.0)
    }

    pub fn subset_of(self, other: Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn is_finite(self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn is_point(self) -> bool {
        self.lo == self.hi
    }

    pub fn hull(self, other: Interval) -> Self {
        Self { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    pub fn intersect(self, other: Interval) -> Result<Self> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        if lo > hi || lo.is_nan() || hi.is_nan() {
            return Err(Error::EmptyIntersection);
        }
        Ok(Self { lo, hi })
    }

    /// Intersection when it is known to be nonempty in exact arithmetic;
    /// falls back to `self` if rounding made the pieces miss each other.
    pub fn clip(self, other: Interval) -> Self {
        self.intersect(other).unwrap_or(self)
    }

    /// x², without the dependency loss of x·x.
    pub fn sqr(self) -> Self {
        let (a, b) = (self.lo.abs(), self.hi.abs());
        if self.contains_zero() {
            Self { lo: 0.0, hi: mul_up(a.max(b), a.max(b)) }
        } else {
            let (m, n) = if a < b { (a, b) } else { (b, a) };
            Self { lo: mul_down(m, m), hi: mul_up(n, n) }
        }
    }

    /// Square root of the part of the interval in [0, ∞).
    pub fn sqrt(self) -> Result<Self> {
        if self.hi < 0.0 {
            return Err(Error::Domain(format!("sqrt of negative interval [{}, {}]", self.lo, self.hi)));
        }
        Ok(Self { lo: sqrt_down(self.lo.max(0.0)), hi: sqrt_up(self.hi) })
    }

    /// Like [`Interval::sqrt`], but an interval with no nonnegative part maps to NaN bounds.
    pub fn sqrt_or_nan(self) -> Self {
        self.sqrt().unwrap_or(Self { lo: f64::NAN, hi: f64::NAN })
    }

    pub fn exp(self) -> Self {
        let lo = widen_down(self.lo.exp(), 2).max(0.0);
        let hi = if self.hi == f64::INFINITY { f64::INFINITY } else { widen_up(self.hi.exp(), 2) };
        Self { lo, hi }
    }

    /// Natural logarithm of the part of the interval in [0, ∞).
    pub fn ln(self) -> Result<Self> {
        if self.hi < 0.0 {
            return Err(Error::Domain(format!("log of negative interval [{}, {}]", self.lo, self.hi)));
        }
        let lo = if self.lo <= 0.0 { f64::NEG_INFINITY } else { widen_down(self.lo.ln(), 2) };
        let hi = if self.hi == f64::INFINITY { f64::INFINITY } else { widen_up(self.hi.ln(), 2) };
        Ok(Self { lo, hi })
    }

    /// Arc cosine of the part of the interval inside [−1, 1].
    pub fn acos(self) -> Result<Self> {
        let c = self.intersect(Interval { lo: -1.0, hi: 1.0 })?;
        let lo = widen_down(c.hi.acos(), 2).max(0.0);
        let hi = widen_up(c.lo.acos(), 2).min(PI_I.hi);
        Ok(Self { lo, hi })
    }

    pub fn sin(self) -> Self {
        let unit = Interval { lo: -1.0, hi: 1.0 };
        if !self.is_finite() || self.width() >= 2.0 * PI {
            return unit;
        }
        let a = self.lo.sin();
        let b = self.hi.sin();
        let mut out = Self { lo: widen_down(a.min(b), 2), hi: widen_up(a.max(b), 2) };
        // Extrema sit at π/2 + kπ; include every one that might be inside.
        let k0 = ((self.lo - PI / 2.0) / PI).floor() as i64;
        for k in (k0 - 1)..=(k0 + 3) {
            let crit = Interval::point(0.5) * PI_I + Interval::point(k as f64) * PI_I;
            if crit.hi >= self.lo && crit.lo <= self.hi {
                let v = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                out = out.hull(Interval::point(v));
            }
        }
        Self { lo: out.lo.max(-1.0), hi: out.hi.min(1.0) }
    }

    pub fn min(self, other: Interval) -> Self {
        Self { lo: self.lo.min(other.lo), hi: self.hi.min(other.hi) }
    }

    pub fn max(self, other: Interval) -> Self {
        Self { lo: self.lo.max(other.lo), hi: self.hi.max(other.hi) }
    }

    /// Division that refuses denominators containing zero.
    pub fn checked_div(self, other: Interval) -> Result<Self> {
        if other.contains_zero() {
            return Err(Error::Domain(format!("division by interval [{}, {}] containing zero", other.lo, other.hi)));
        }
        Ok(self / other)
    }

    /// Multiplication by 2^k, which is exact away from overflow and underflow.
    pub fn scale_pow2(self, factor: f64) -> Self {
        let lo = self.lo * factor;
        let hi = self.hi * factor;
        let (lo, hi) = if factor < 0.0 { (hi, lo) } else { (lo, hi) };
        if lo.abs() < TINY || hi.abs() < TINY || !lo.is_finite() || !hi.is_finite() {
            return Self { lo: lo.next_down(), hi: hi.next_up() };
        }
        Self { lo, hi }
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, o: Interval) -> Interval {
        Interval { lo: add_down(self.lo, o.lo), hi: add_up(self.hi, o.hi) }
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, o: Interval) -> Interval {
        Interval { lo: add_down(self.lo, -o.hi), hi: add_up(self.hi, -o.lo) }
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, o: Interval) -> Interval {
        let (a, b, c, d) = (self.lo, self.hi, o.lo, o.hi);
        if a >= 0.0 && c >= 0.0 {
            return Interval { lo: mul_down(a, c), hi: mul_up(b, d) };
        }
        if b <= 0.0 && d <= 0.0 {
            return Interval { lo: mul_down(b, d), hi: mul_up(a, c) };
        }
        let cands = [(a, c), (a, d), (b, c), (b, d)];
        let lo = cands.iter().map(|&(x, y)| mul_down(x, y)).fold(f64::INFINITY, f64::min);
        let hi = cands.iter().map(|&(x, y)| mul_up(x, y)).fold(f64::NEG_INFINITY, f64::max);
        Interval { lo, hi }
    }
}

impl Div for Interval {
    type Output = Interval;
    /// A denominator containing zero yields the entire line.
    fn div(self, o: Interval) -> Interval {
        if o.contains_zero() || o.lo.is_nan() || o.hi.is_nan() {
            return Interval::entire();
        }
        let (a, b, c, d) = (self.lo, self.hi, o.lo, o.hi);
        let cands = [(a, c), (a, d), (b, c), (b, d)];
        let lo = cands.iter().map(|&(x, y)| div_down(x, y)).fold(f64::INFINITY, f64::min);
        let hi = cands.iter().map(|&(x, y)| div_up(x, y)).fold(f64::NEG_INFINITY, f64::max);
        Interval { lo, hi }
    }
}

impl Add<f64> for Interval {
    type Output = Interval;
    fn add(self, o: f64) -> Interval {
        self + Interval::point(o)
    }
}

impl Sub<f64> for Interval {
    type Output = Interval;
    fn sub(self, o: f64) -> Interval {
        self - Interval::point(o)
    }
}

impl Mul<f64> for Interval {
    type Output = Interval;
    fn mul(self, o: f64) -> Interval {
        self * Interval::point(o)
    }
}

impl Div<f64> for Interval {
    type Output = Interval;
    fn div(self, o: f64) -> Interval {
        self / Interval::point(o)
    }
}

/// A pair of bias intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Box2 {
    pub bi: Interval,
    pub bj: Interval,
}

impl Box2 {
    pub fn new(bi: Interval, bj: Interval) -> Result<Self> {
        let unit = Interval { lo: -1.0, hi: 1.0 };
        if !bi.subset_of(unit) || !bj.subset_of(unit) {
            return Err(Error::Domain("box leaves [-1, 1]^2".into()));
        }
        Ok(Self { bi, bj })
    }

    pub fn point(bi: f64, bj: f64) -> Result<Self> {
        Self::new(Interval::point(bi), Interval::point(bj))
    }

    /// Some point of the box has b_i + b_j ≥ 0.
    pub fn meets_feasible(&self) -> bool {
        self.bi.hi + self.bj.hi >= 0.0
    }

    /// Every point of the box has b_i + b_j ≥ 0.
    pub fn fully_feasible(&self) -> bool {
        add_down(self.bi.lo, self.bj.lo) >= 0.0
    }

    pub fn swapped(&self) -> Self {
        Self { bi: self.bj, bj: self.bi }
    }

    pub fn center(&self) -> (f64, f64) {
        (self.bi.mid(), self.bj.mid())
    }
}
