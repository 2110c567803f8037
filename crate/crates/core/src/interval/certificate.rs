//! Box-subdivision certificate that the slack s(b_i, b_j) − p(b_i + b_j)/2 − q is
//! nonnegative on the whole feasible square, for every b0 in a small window.
//!
//! Away from (b0, b0) the slack is bounded below directly. On the square of
//! radius r around (b0, b0) the threshold is affine, so the slack is C² there; a
//! positive definite Hessian plus a vanishing gradient at (b0, b0) finish it.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::arith::{Box2, Interval, ROUNDING_MODE};
use super::soundness::{hessian_pd_check, i_rho, soundness_derivatives, DerivativeInput, SlackContext};
use crate::error::{Error, Result};
use crate::gaussian::compute_critical_constants;
use crate::rounding::ThresholdFunction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CertificateConfig {
    /// Boxes per side of the starting grid.
    pub initial_grid: usize,
    pub max_depth: u32,
    /// Boxes per side of the starting grid on the square around (b0, b0).
    pub near_grid: usize,
    pub near_max_depth: u32,
    /// Stop after this many far-case boxes; the remainder is reported as failures.
    pub max_boxes: u64,
    /// Only certify this part of [−1, 1]².
    pub region: Option<Box2>,
    /// Thread cap; None uses the global pool.
    pub workers: Option<usize>,
}

impl Default for CertificateConfig {
    fn default() -> Self {
        Self {
            initial_grid: 64,
            max_depth: 40,
            near_grid: 4,
            near_max_depth: 12,
            max_boxes: 20_000_000,
            region: None,
            workers: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub verified: bool,
    pub boxes_checked: u64,
    pub max_depth: u32,
    pub near_case_boxes: u64,
    pub failures: Vec<Box2>,
    pub eta: f64,
    pub b0: Interval,
    /// "full" when eta > 0, "relaxed" for a single b0.
    pub mode: String,
    pub rounding_mode: String,
    pub runtime_seconds: f64,
    pub far_case_verified: bool,
    pub near_case_verified: bool,
    pub critical_point_verified: bool,
    /// A point where the slack was proven negative, if one turned up.
    pub counterexample: Option<(f64, f64)>,
}

enum Verdict {
    Accepted,
    Skipped,
    Split(Vec<Box2>),
    Unresolved,
    Violated(f64, f64),
}

struct FarCase<'a> {
    ctx: &'a SlackContext,
    inner_lo: f64,
    inner_hi: f64,
    max_depth: u32,
}

impl FarCase<'_> {
    fn inside_inner(&self, b: &Box2) -> bool {
        let inside = |x: Interval| self.inner_lo <= x.lo && x.hi <= self.inner_hi;
        inside(b.bi) && inside(b.bj)
    }

    /// Cut along an edge of the inner square if the box sticks partly into it.
    fn inner_cut(&self, b: &Box2) -> Option<Vec<Box2>> {
        let overlaps = |x: Interval| x.hi > self.inner_lo && x.lo < self.inner_hi;
        if !(overlaps(b.bi) && overlaps(b.bj)) {
            return None;
        }
        for axis in 0..2 {
            let x = if axis == 0 { b.bi } else { b.bj };
            for edge in [self.inner_lo, self.inner_hi] {
                if x.lo < edge && edge < x.hi {
                    return Some(split_at(b, axis, edge).to_vec());
                }
            }
        }
        None
    }

    fn check(&self, b: &Box2, depth: u32) -> Verdict {
        if !b.meets_feasible() || b.bi.lo > b.bj.hi || self.inside_inner(b) {
            return Verdict::Skipped;
        }
        if let Some(parts) = self.inner_cut(b) {
            return Verdict::Split(parts);
        }
        let b = &trim_to_feasible(b);
        let ctx = self.ctx;
        if ctx.lower_monotone(b).is_some_and(|lo| lo > 0.0) {
            return Verdict::Accepted;
        }
        let grad = ctx.slack_gradient(b);
        if let Some(g) = &grad {
            if ctx.lower_mean_value(b, g).is_some_and(|lo| lo > 0.0) {
                return Verdict::Accepted;
            }
        }
        let (ci, cj) = b.center();
        let centre = Box2 { bi: Interval::point(ci), bj: Interval::point(cj) };
        if centre.fully_feasible()
            && ctx.upper_monotone(&centre).is_some_and(|hi| hi < 0.0) {
                return Verdict::Violated(ci, cj);
            }
        if depth >= self.max_depth {
            return Verdict::Unresolved;
        }
        let axis = self.split_axis(b, grad.as_ref());
        let x = if axis == 0 { b.bi } else { b.bj };
        let at = match ctx.threshold.interior_knot(x) {
            Some(k) => k.mid(),
            None => 0.5 * (x.lo + x.hi),
        };
        if !(x.lo < at && at < x.hi) {
            return Verdict::Unresolved;
        }
        Verdict::Split(split_at(b, axis, at).to_vec())
    }

    fn split_axis(&self, b: &Box2, grad: Option<&[Interval; 2]>) -> usize {
        let widths = [b.bi.width(), b.bj.width()];
        let score = |axis: usize| -> f64 {
            if let Some(g) = grad {
                return g[axis].mag() * widths[axis];
            }
            let (ci, cj) = b.center();
            let (x, rho) = if axis == 0 {
                (b.bi, i_rho(b.bi, Interval::point(cj)))
            } else {
                (b.bj, i_rho(Interval::point(ci), b.bj))
            };
            let thresholds = self.ctx.thresholds(x).width().min(10.0);
            rho.width() + 0.4 * thresholds + 1e-3 * widths[axis]
        };
        let (s0, s1) = (score(0), score(1));
        let pick = match s0.partial_cmp(&s1) {
            Some(std::cmp::Ordering::Less) => 1,
            Some(_) => 0,
            None => usize::from(widths[1] > widths[0]),
        };
        if widths[pick] > 0.0 { pick } else { 1 - pick }
    }
}

/// Smallest sub-box holding every point of `b` with b_i + b_j ≥ 0.
fn trim_to_feasible(b: &Box2) -> Box2 {
    Box2 {
        bi: Interval { lo: b.bi.lo.max(-b.bj.hi), hi: b.bi.hi },
        bj: Interval { lo: b.bj.lo.max(-b.bi.hi), hi: b.bj.hi },
    }
}

fn split_at(b: &Box2, axis: usize, at: f64) -> [Box2; 2] {
    if axis == 0 {
        [
            Box2 { bi: Interval { lo: b.bi.lo, hi: at }, bj: b.bj },
            Box2 { bi: Interval { lo: at, hi: b.bi.hi }, bj: b.bj },
        ]
    } else {
        [
            Box2 { bi: b.bi, bj: Interval { lo: b.bj.lo, hi: at } },
            Box2 { bi: b.bi, bj: Interval { lo: at, hi: b.bj.hi } },
        ]
    }
}

fn grid(region: &Box2, n: usize) -> Vec<Box2> {
    let coord = |x: Interval, k: usize| {
        if k == n { x.hi } else { x.lo + (x.hi - x.lo) * k as f64 / n as f64 }
    };
    let mut out = Vec::with_capacity(n * n);
    for a in 0..n {
        for c in 0..n {
            out.push(Box2 {
                bi: Interval { lo: coord(region.bi, a), hi: coord(region.bi, a + 1) },
                bj: Interval { lo: coord(region.bj, c), hi: coord(region.bj, c + 1) },
            });
        }
    }
    out
}

struct FarOutcome {
    boxes: u64,
    depth: u32,
    failures: Vec<Box2>,
    counterexample: Option<(f64, f64)>,
}

fn run_far_case(far: &FarCase<'_>, region: &Box2, cfg: &CertificateConfig) -> FarOutcome {
    let mut level = grid(region, cfg.initial_grid.max(1));
    let mut out = FarOutcome { boxes: 0, depth: 0, failures: Vec::new(), counterexample: None };
    let mut depth = 0u32;
    while !level.is_empty() {
        if out.boxes >= cfg.max_boxes {
            out.failures.extend(level);
            break;
        }
        let verdicts: Vec<Verdict> = level.par_iter().map(|b| far.check(b, depth)).collect();
        let mut next = Vec::new();
        for (b, v) in level.iter().zip(verdicts) {
            match v {
                Verdict::Skipped => {}
                Verdict::Accepted => out.boxes += 1,
                Verdict::Split(parts) => {
                    out.boxes += 1;
                    next.extend(parts);
                }
                Verdict::Unresolved => {
                    out.boxes += 1;
                    out.failures.push(*b);
                }
                Verdict::Violated(x, y) => {
                    out.boxes += 1;
                    out.failures.push(*b);
                    out.counterexample.get_or_insert((x, y));
                }
            }
        }
        out.depth = depth;
        if out.counterexample.is_some() {
            break;
        }
        level = next;
        depth += 1;
    }
    out
}

/// Hessian input on the square where t(b) = ½ + slope·(b − b0).
fn affine_input(b: &Box2, b0: Interval, slope: f64) -> DerivativeInput<Interval> {
    let half = Interval::point(0.5);
    let c = Interval::point(slope);
    DerivativeInput {
        bi: b.bi,
        bj: b.bj,
        rho: i_rho(b.bi, b.bj),
        ti: half + c * (b.bi - b0),
        tj: half + c * (b.bj - b0),
        ci: c,
        cj: c,
    }
}

fn run_near_case(square: &Box2, b0: Interval, slope: f64, cfg: &CertificateConfig) -> (u64, Vec<Box2>) {
    let mut level = grid(square, cfg.near_grid.max(1));
    let mut boxes = 0u64;
    let mut failures = Vec::new();
    let mut depth = 0u32;
    while !level.is_empty() {
        let results: Vec<bool> = level
            .par_iter()
            .map(|b| {
                let input = affine_input(b, b0, slope);
                input.rho.lo > -1.0 && hessian_pd_check(&soundness_derivatives(&input).hess)
            })
            .collect();
        boxes += level.len() as u64;
        let mut next = Vec::new();
        for (b, ok) in level.iter().zip(results) {
            if ok {
                continue;
            }
            if depth >= cfg.near_max_depth {
                failures.push(*b);
                continue;
            }
            let (ci, cj) = b.center();
            for half in split_at(b, 0, ci) {
                next.extend(split_at(&half, 1, cj));
            }
        }
        level = next;
        depth += 1;
    }
    (boxes, failures)
}

/// Runs both cases for b0 ∈ [b0_center − eta, b0_center + eta].
pub fn verify_certificate(
    b0_center: f64,
    eta: f64,
    t: &ThresholdFunction,
    cfg: &CertificateConfig,
) -> Result<CertificateReport> {
    let b_star = compute_critical_constants().b_star;
    if !b0_center.is_finite() || (b0_center - b_star).abs() > 1e-6 {
        return Err(Error::Domain(format!("b0 = {b0_center} is not within 1e-6 of the critical bias")));
    }
    if !(0.0..=1e-6).contains(&eta) {
        return Err(Error::Domain(format!("eta = {eta} outside [0, 1e-6]")));
    }
    let work = || verify_inner(b0_center, eta, t, cfg);
    match cfg.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Domain(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    }
}

fn verify_inner(b0_center: f64, eta: f64, t: &ThresholdFunction, cfg: &CertificateConfig) -> Result<CertificateReport> {
    let started = Instant::now();
    let b0 = Interval::point(b0_center) + Interval { lo: -eta, hi: eta };
    let ctx = SlackContext::new(t, b0)?;
    let radius = Interval::point(t.r);
    let inner_lo = (Interval::point(b0.hi) - radius).hi;
    let inner_hi = (Interval::point(b0.lo) + radius).lo;
    let outer = Interval { lo: (Interval::point(b0.lo) - radius).lo, hi: (Interval::point(b0.hi) + radius).hi };
    let whole = Interval { lo: -1.0, hi: 1.0 };
    let region = cfg.region.unwrap_or(Box2 { bi: whole, bj: whole });

    let far = FarCase { ctx: &ctx, inner_lo, inner_hi, max_depth: cfg.max_depth };
    let far_out = run_far_case(&far, &region, cfg);
    let far_ok = far_out.failures.is_empty();

    let near_square = Box2 { bi: outer, bj: outer };
    let near_needed = region.bi.hi > outer.lo && region.bi.lo < outer.hi && region.bj.hi > outer.lo && region.bj.lo < outer.hi;
    let mut failures = far_out.failures;
    let (mut near_boxes, mut near_ok, mut critical_ok) = (0, true, true);
    if near_needed && far_out.counterexample.is_none() {
        let (boxes, near_failures) = run_near_case(&near_square, b0, t.mid_slope, cfg);
        near_boxes = boxes;
        near_ok = near_failures.is_empty();
        failures.extend(near_failures);
        let centre = Box2 { bi: b0, bj: b0 };
        let d = soundness_derivatives(&affine_input(&centre, b0, t.mid_slope));
        let half_p = ctx.threshold.p * 0.5;
        critical_ok = d.grad.iter().all(|g| (*g - half_p).contains_zero());
        if !critical_ok {
            failures.push(centre);
        }
    }
    Ok(CertificateReport {
        verified: failures.is_empty(),
        boxes_checked: far_out.boxes,
        max_depth: far_out.depth,
        near_case_boxes: near_boxes,
        failures,
        eta,
        b0,
        mode: if eta > 0.0 { "full".into() } else { "relaxed".into() },
        rounding_mode: ROUNDING_MODE.into(),
        runtime_seconds: started.elapsed().as_secs_f64(),
        far_case_verified: far_ok,
        near_case_verified: near_ok,
        critical_point_verified: critical_ok,
        counterexample: far_out.counterexample,
    })
}
