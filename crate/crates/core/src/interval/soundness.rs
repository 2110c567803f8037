//! Interval versions of the bias correlation, the threshold, the (p, q) line,
//! the soundness slack and its first and second derivatives.

use std::ops::{Add, Div, Mul, Neg, Sub};

use super::arith::{Box2, Interval, PI_I};
use super::bvn::{bvn_lower, bvn_upper};
use super::special::{i_pdf, i_phi, i_phi_inv_ext};
use crate::error::{Error, Result};
use crate::gaussian::{std_normal_cdf, std_normal_pdf, std_normal_quantile_ext};
use crate::rounding::ThresholdFunction;

/// Numbers the derivative formulas can run on: plain doubles or intervals.
pub trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn cst(v: f64) -> Self;
    fn pi() -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn sqr(self) -> Self;
    fn cdf(self) -> Self;
    fn pdf(self) -> Self;
    fn quantile(self) -> Self;
    /// Combine two expressions for the same quantity.
    fn meet(self, other: Self) -> Self;
}

impl Scalar for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn sqr(self) -> Self {
        self * self
    }
    fn cdf(self) -> Self {
        std_normal_cdf(self)
    }
    fn pdf(self) -> Self {
        std_normal_pdf(self)
    }
    fn quantile(self) -> Self {
        std_normal_quantile_ext(self)
    }
    fn meet(self, other: Self) -> Self {
        0.5 * (self + other)
    }
}

impl Scalar for Interval {
    fn cst(v: f64) -> Self {
        Interval::point(v)
    }
    fn pi() -> Self {
        PI_I
    }
    fn sqrt(self) -> Self {
        self.sqrt_or_nan()
    }
    fn exp(self) -> Self {
        Interval::exp(self)
    }
    fn sqr(self) -> Self {
        Interval::sqr(self)
    }
    fn cdf(self) -> Self {
        i_phi(self)
    }
    fn pdf(self) -> Self {
        i_pdf(self)
    }
    fn quantile(self) -> Self {
        i_phi_inv_ext(self)
    }
    fn meet(self, other: Self) -> Self {
        self.clip(other)
    }
}

/// Bias pair, threshold values and local threshold slopes at which to differentiate.
#[derive(Debug, Clone, Copy)]
pub struct DerivativeInput<S> {
    pub bi: S,
    pub bj: S,
    pub rho: S,
    pub ti: S,
    pub tj: S,
    pub ci: S,
    pub cj: S,
}

/// ∇s and ∇²s of the soundness s(b_i, b_j).
#[derive(Debug, Clone, Copy)]
pub struct SoundnessDerivatives<S> {
    pub grad: [S; 2],
    pub hess: [[S; 2]; 2],
}

/// Closed-form derivatives of s = t_i + t_j − 2Φ_ρ(r_i, r_j) with r = Φ⁻¹(t).
pub fn soundness_derivatives<S: Scalar>(d: &DerivativeInput<S>) -> SoundnessDerivatives<S> {
    let one = S::cst(1.0);
    let two = S::cst(2.0);
    let (bi, bj, rho) = (d.bi, d.bj, d.rho);
    // ρ = −√(A_i A_j) with A = (1−b)/(1+b) and D = √((1+b)³(1−b)).
    let ai = (one - bi) / (one + bi);
    let aj = (one - bj) / (one + bj);
    let di = ((one + bi) * (one + bi) * (one + bi) * (one - bi)).sqrt();
    let dj = ((one + bj) * (one + bj) * (one + bj) * (one - bj)).sqrt();
    let rho_i = aj.sqrt() / di;
    let rho_j = ai.sqrt() / dj;
    let rho_ij = -(one / (di * dj));
    let rho_ii = -(aj.sqrt() * (one + bi).sqr() * (one - two * bi) / (di * di * di));
    let rho_jj = -(ai.sqrt() * (one + bj).sqr() * (one - two * bj) / (dj * dj * dj));

    let ri = d.ti.quantile();
    let rj = d.tj.quantile();
    let sigma2 = one - rho.sqr();
    let sigma = sigma2.sqrt();
    let q = ri.sqr() - two * rho * ri * rj + rj.sqr();
    let dens = (-(q / (two * sigma2))).exp() / (two * S::pi() * sigma);
    let zij = (rj - rho * ri) / sigma;
    let zji = (ri - rho * rj) / sigma;
    let dri = d.ci / ri.pdf();
    let drj = d.cj / rj.pdf();

    let grad_i = d.ci - two * d.ci * zij.cdf() - two * dens * rho_i;
    let grad_j = d.cj - two * d.cj * zji.cdf() - two * dens * rho_j;

    let sigma3 = sigma2 * sigma;
    let dzij_drho = -(ri / sigma) + (rj - rho * ri) * rho / sigma3;
    let dzji_drho = -(rj / sigma) + (ri - rho * rj) * rho / sigma3;
    let dzij_dbi = -(rho / sigma) * dri + dzij_drho * rho_i;
    let dzij_dbj = drj / sigma + dzij_drho * rho_j;
    let dzji_dbj = -(rho / sigma) * drj + dzji_drho * rho_j;
    let dzji_dbi = dri / sigma + dzji_drho * rho_i;

    // Logarithmic derivatives of the bivariate density.
    let lx = -((ri - rho * rj) / sigma2);
    let ly = -((rj - rho * ri) / sigma2);
    let lrho = rho / sigma2 + (ri * rj * sigma2 - rho * q) / (sigma2 * sigma2);
    let ddens_dbi = dens * (lx * dri + lrho * rho_i);
    let ddens_dbj = dens * (ly * drj + lrho * rho_j);

    let f_ii = d.ci * zij.pdf() * dzij_dbi + ddens_dbi * rho_i + dens * rho_ii;
    let f_jj = d.cj * zji.pdf() * dzji_dbj + ddens_dbj * rho_j + dens * rho_jj;
    let f_ij = d.ci * zij.pdf() * dzij_dbj + ddens_dbj * rho_i + dens * rho_ij;
    let f_ji = d.cj * zji.pdf() * dzji_dbi + ddens_dbi * rho_j + dens * rho_ij;
    let m2 = S::cst(-2.0);
    let off = (m2 * f_ij).meet(m2 * f_ji);
    SoundnessDerivatives { grad: [grad_i, grad_j], hess: [[m2 * f_ii, off], [off, m2 * f_jj]] }
}

/// Enclosure of ρ(b_i, b_j), clamped to [−1, 0], including the value 0 whenever
/// (1 + b_i)(1 + b_j) can vanish.
pub fn i_rho(bi: Interval, bj: Interval) -> Interval {
    let one = Interval::point(1.0);
    // A(b) = (1 − b)/(1 + b) is decreasing.
    let a_lo = |b: f64| if b <= -1.0 { f64::INFINITY } else { ((one - b) / (one + b)).lo.max(0.0) };
    let a_hi = |b: f64| if b <= -1.0 { f64::INFINITY } else { ((one - b) / (one + b)).hi.max(0.0) };
    let mul_lo = |x: f64, y: f64| if x == 0.0 || y == 0.0 { 0.0 } else { (Interval::point(x) * Interval::point(y)).lo };
    let mul_hi = |x: f64, y: f64| {
        if x == f64::INFINITY || y == f64::INFINITY {
            f64::INFINITY
        } else {
            (Interval::point(x) * Interval::point(y)).hi
        }
    };
    let small = mul_lo(a_lo(bi.hi), a_lo(bj.hi));
    let large = mul_hi(a_hi(bi.lo), a_hi(bj.lo));
    let hi = if small.is_finite() { -Interval::point(small).sqrt_or_nan().lo } else { -1.0 };
    let lo = if large.is_finite() { -Interval::point(large).sqrt_or_nan().hi } else { -1.0 };
    let mut out = Interval { lo: lo.max(-1.0), hi: hi.clamp(-1.0, 0.0) };
    if out.lo > out.hi {
        out.lo = out.hi;
    }
    if bi.lo <= -1.0 || bj.lo <= -1.0 {
        out = out.hull(Interval::point(0.0));
    }
    out
}

/// (p, q) as intervals: s₀ = arccos(ρ(b0, b0))/π, p = −2/((1+b0)²π sin(πs₀)), q = s₀ − p·b0.
pub fn i_pq(b0: Interval) -> Result<(Interval, Interval)> {
    let rho0 = i_rho(b0, b0);
    let s0 = rho0.acos()? / PI_I;
    let sin = (PI_I * s0).sin();
    let den = (Interval::point(1.0) + b0).sqr() * PI_I * sin;
    let p = Interval::point(-2.0).checked_div(den)?;
    let q = s0 - p * b0;
    Ok((p, q))
}

/// The seven-breakpoint threshold with its knots and values as intervals over a window of b0.
#[derive(Debug, Clone)]
pub struct IntervalThreshold {
    pub knots: Vec<Interval>,
    pub values: Vec<Interval>,
    pub p: Interval,
    pub q: Interval,
    pub b0: Interval,
}

impl IntervalThreshold {
    /// Rebuilds the family of `t` (same δ, r, middle slope and t(1) − q) for every b0 in the window.
    pub fn from_family(t: &ThresholdFunction, b0: Interval) -> Result<Self> {
        if t.breakpoints.len() != 7 {
            return Err(Error::Domain("threshold is not of the seven-breakpoint form".into()));
        }
        let (p, q) = i_pq(b0)?;
        let point = Interval::point;
        let half = point(0.5);
        let r = point(t.r);
        let delta = point(t.delta);
        let rise = point(t.mid_slope) * r;
        let top_offset = point(t.top_value()) - point(t.q);
        let knots = vec![point(-1.0), -b0, point(0.0), b0 - r, b0, b0 + r, point(1.0)];
        let values = vec![point(0.0), q - half + delta, q * half + delta, half - rise, half, half + rise, q + top_offset];
        for k in 0..6 {
            if knots[k].hi >= knots[k + 1].lo || values[k].hi > values[k + 1].lo {
                return Err(Error::Domain("threshold knots or values are not increasing".into()));
            }
        }
        if values[0].lo < 0.0 || values[6].hi > 1.0 {
            return Err(Error::Domain("threshold leaves [0, 1]".into()));
        }
        Ok(Self { knots, values, p, q, b0 })
    }

    pub fn radius(&self) -> f64 {
        (self.knots[5] - self.knots[4]).mid()
    }

    fn segments_at(&self, lo: f64, hi: f64) -> impl Iterator<Item = usize> + '_ {
        (0..6).filter(move |&k| self.knots[k].lo <= hi && lo <= self.knots[k + 1].hi)
    }

    /// t(b) for every b0 in the window.
    pub fn value_at(&self, b: f64) -> Interval {
        let mut out: Option<Interval> = None;
        for k in self.segments_at(b, b) {
            let (x1, x2) = (self.knots[k], self.knots[k + 1]);
            let (v1, v2) = (self.values[k], self.values[k + 1]);
            let frac = ((Interval::point(b) - x1) / (x2 - x1)).clip(Interval { lo: 0.0, hi: 1.0 });
            let v = (v1 + (v2 - v1) * frac).clip(v1.hull(v2));
            out = Some(out.map_or(v, |o| o.hull(v)));
        }
        out.unwrap_or(Interval { lo: 0.0, hi: 1.0 })
    }

    /// t over an interval of biases; t is increasing.
    pub fn value(&self, b: Interval) -> Interval {
        Interval { lo: self.value_at(b.lo).lo, hi: self.value_at(b.hi).hi }
    }

    /// Hull of the slopes of every piece that meets `b`.
    pub fn slope_hull(&self, b: Interval) -> Interval {
        let mut out: Option<Interval> = None;
        for k in self.segments_at(b.lo, b.hi) {
            let s = (self.values[k + 1] - self.values[k]) / (self.knots[k + 1] - self.knots[k]);
            out = Some(out.map_or(s, |o| o.hull(s)));
        }
        out.unwrap_or(Interval::entire())
    }

    /// Index of the piece whose open interior holds `b` for every b0 in the window.
    pub fn single_piece(&self, b: Interval) -> Option<usize> {
        (0..6).find(|&k| self.knots[k].hi < b.lo && b.hi < self.knots[k + 1].lo)
    }

    /// Knot whose window lies strictly inside `b`, if any.
    pub fn interior_knot(&self, b: Interval) -> Option<Interval> {
        self.knots.iter().copied().find(|k| b.lo < k.lo && k.hi < b.hi)
    }
}

/// Everything needed to bound the slack s(b_i, b_j) − p(b_i + b_j)/2 − q over boxes.
#[derive(Debug, Clone)]
pub struct SlackContext {
    pub threshold: IntervalThreshold,
}

impl SlackContext {
    pub fn new(t: &ThresholdFunction, b0: Interval) -> Result<Self> {
        Ok(Self { threshold: IntervalThreshold::from_family(t, b0)? })
    }

    fn p(&self) -> Interval {
        self.threshold.p
    }

    /// p(b_i + b_j)/2 + q over the feasible part of the box, or None if there is none.
    pub fn affine_term(&self, b: &Box2) -> Option<Interval> {
        let sum = b.bi + b.bj;
        if sum.hi < 0.0 {
            return None;
        }
        let sum = Interval { lo: sum.lo.max(0.0), hi: sum.hi };
        Some(self.p() * sum * 0.5 + self.threshold.q)
    }

    pub fn thresholds(&self, b: Interval) -> Interval {
        i_phi_inv_ext(self.threshold.value(b))
    }

    /// Lower bound from monotonicity: Φ_ρ increases in ρ, x and y.
    pub fn lower_monotone(&self, b: &Box2) -> Option<f64> {
        let affine = self.affine_term(b)?;
        let rho = i_rho(b.bi, b.bj).hi;
        let (xi, xj) = (self.thresholds(b.bi), self.thresholds(b.bj));
        let out = bvn_upper(rho, xi.hi, xj.hi);
        let inn = bvn_upper(rho, -xi.lo, -xj.lo);
        let s = Interval::point(1.0) - Interval::point(out) - Interval::point(inn);
        Some((Interval::point(s.lo) - Interval::point(affine.hi)).lo)
    }

    pub fn upper_monotone(&self, b: &Box2) -> Option<f64> {
        let affine = self.affine_term(b)?;
        let rho = i_rho(b.bi, b.bj).lo;
        let (xi, xj) = (self.thresholds(b.bi), self.thresholds(b.bj));
        let out = bvn_lower(rho, xi.lo, xj.lo);
        let inn = bvn_lower(rho, -xi.hi, -xj.hi);
        let s = Interval::point(1.0) - Interval::point(out) - Interval::point(inn);
        Some((Interval::point(s.hi) - Interval::point(affine.lo)).hi)
    }

    /// Derivative input over a box, with the slope hull standing in for the
    /// derivative of t where a knot may lie inside.
    pub fn derivative_input(&self, b: &Box2) -> DerivativeInput<Interval> {
        let th = &self.threshold;
        DerivativeInput {
            bi: b.bi,
            bj: b.bj,
            rho: i_rho(b.bi, b.bj),
            ti: th.value(b.bi),
            tj: th.value(b.bj),
            ci: th.slope_hull(b.bi),
            cj: th.slope_hull(b.bj),
        }
    }

    /// Enclosure of the slack gradient over a box of fully feasible interior points;
    /// None where the formulas blow up (b = ±1 or ρ = −1).
    pub fn slack_gradient(&self, b: &Box2) -> Option<[Interval; 2]> {
        if !b.fully_feasible() || b.bi.hi >= 1.0 || b.bj.hi >= 1.0 || b.bi.lo <= -1.0 || b.bj.lo <= -1.0 {
            return None;
        }
        let input = self.derivative_input(b);
        if input.rho.lo <= -1.0 {
            return None;
        }
        let d = soundness_derivatives(&input);
        let half_p = self.p() * 0.5;
        let g = [d.grad[0] - half_p, d.grad[1] - half_p];
        if g.iter().all(|x| x.is_finite()) { Some(g) } else { None }
    }

    /// Mean-value lower bound: slack(c) + ∇slack(box)·(box − c).
    pub fn lower_mean_value(&self, b: &Box2, grad: &[Interval; 2]) -> Option<f64> {
        let (ci, cj) = b.center();
        let centre = Box2 { bi: Interval::point(ci), bj: Interval::point(cj) };
        let base = self.lower_monotone(&centre)?;
        let spread = grad[0] * (b.bi - ci) + grad[1] * (b.bj - cj);
        Some((Interval::point(base) + Interval::point(spread.lo)).lo)
    }

    /// Enclosure of the slack over the feasible part of a box; None if the box is infeasible.
    ///
    /// Built from the monotone bounds only, so it is inclusion isotone.
    pub fn enclosure(&self, b: &Box2) -> Option<Interval> {
        let lo = self.lower_monotone(b)?;
        let hi = self.upper_monotone(b)?;
        Some(Interval { lo, hi: hi.max(lo) })
    }
}

/// Slack enclosure s(b_i, b_j) − (p(b_i + b_j)/2 + q) over a box, with p, q and t taken over the b0 window.
pub fn i_slack(b0: Interval, b: &Box2, t: &ThresholdFunction) -> Result<Option<Interval>> {
    let ctx = SlackContext::new(t, b0)?;
    Ok(ctx.enclosure(b))
}

/// Gradient and Hessian enclosures of s over a box inside a single linear piece of t on each side.
pub fn i_derivatives(b: &Box2, t: &ThresholdFunction, b0: Interval) -> Result<([Interval; 2], [[Interval; 2]; 2])> {
    let th = IntervalThreshold::from_family(t, b0)?;
    let (Some(_), Some(_)) = (th.single_piece(b.bi), th.single_piece(b.bj)) else {
        return Err(Error::Domain("box touches a threshold breakpoint".into()));
    };
    let rho = i_rho(b.bi, b.bj);
    if rho.lo <= -1.0 || rho.hi >= 0.0 {
        return Err(Error::Domain("correlation reaches -1 or 0 on the box".into()));
    }
    let input = DerivativeInput {
        bi: b.bi,
        bj: b.bj,
        rho,
        ti: th.value(b.bi),
        tj: th.value(b.bj),
        ci: th.slope_hull(b.bi),
        cj: th.slope_hull(b.bj),
    };
    let d = soundness_derivatives(&input);
    Ok((d.grad, d.hess))
}

/// 2×2 Sylvester test: h₀₀ > 0 and det > 0 for every matrix in the enclosure.
pub fn hessian_pd_check(h: &[[Interval; 2]; 2]) -> bool {
    let off = h[0][1].clip(h[1][0]);
    let det = h[0][0] * h[1][1] - off.sqr();
    h[0][0].lo > 0.0 && det.lo > 0.0
}
