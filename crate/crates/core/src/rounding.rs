//! Threshold rounding of SDP solutions and the per-edge soundness function.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::gaussian::{
    bvn_cdf, gaussian_cut, std_normal_quantile_ext, Correlation,
};
use crate::sdp::{mean_bias, SdpSolution, WeightedGraph};

/// Width of the window around b0 and the offset δ used by the default threshold.
pub const DEFAULT_DELTA: f64 = 0.001;
pub const DEFAULT_RADIUS: f64 = 0.001;
pub const DEFAULT_MID_SLOPE: f64 = 0.42;
/// t(1) − q in the default threshold.
pub const DEFAULT_TOP_OFFSET: f64 = 0.0095;
/// Perpendicular parts shorter than this are treated as zero.
pub const DEGENERATE_NORM: f64 = 1e-12;

/// Piecewise-linear threshold t: [-1, 1] → [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdFunction {
    pub b0: f64,
    pub q: f64,
    pub delta: f64,
    pub r: f64,
    pub mid_slope: f64,
    /// (b, t(b)) at −1, −b0, 0, b0−r, b0, b0+r, 1.
    pub breakpoints: Vec<(f64, f64)>,
}

impl ThresholdFunction {
    pub fn eval(&self, b: f64) -> f64 {
        threshold_eval(self, b)
    }

    /// Slope of the piece containing `b` (right piece at a breakpoint).
    pub fn slope_at(&self, b: f64) -> f64 {
        let k = self.segment(b);
        let (b1, v1) = self.breakpoints[k];
        let (b2, v2) = self.breakpoints[k + 1];
        (v2 - v1) / (b2 - b1)
    }

    /// Copy with t(1) replaced.
    pub fn with_top_value(&self, value: f64) -> Self {
        let mut out = self.clone();
        if let Some(last) = out.breakpoints.last_mut() {
            last.1 = value;
        }
        out
    }

    pub fn top_value(&self) -> f64 {
        self.breakpoints.last().map(|p| p.1).unwrap_or(0.0)
    }

    fn segment(&self, b: f64) -> usize {
        let last = self.breakpoints.len() - 2;
        (0..=last)
            .find(|&k| b < self.breakpoints[k + 1].0)
            .unwrap_or(last)
    }
}

/// ρ(b_i, b_j): correlation of the perpendicular parts of a feasible pair.
pub fn rho_of_biases(b_i: f64, b_j: f64) -> Correlation {
    let den = (1.0 + b_i) * (1.0 + b_j);
    if den == 0.0 {
        return Correlation::clamped(0.0);
    }
    let ratio = ((1.0 - b_i) * (1.0 - b_j) / den).max(0.0);
    Correlation::clamped(-ratio.sqrt())
}

/// (p, q) with p·b0 + q = s(b0, b0) and p the slope of s along the diagonal.
pub fn pq_constants(b0: f64) -> (f64, f64) {
    let rho0 = rho_of_biases(b0, b0).value();
    let s0 = rho0.acos() / PI;
    let p = -2.0 / ((1.0 + b0).powi(2) * PI * (PI * s0).sin());
    (p, -p * b0 + s0)
}

/// The seven-breakpoint threshold centred at `b0`.
pub fn default_threshold(b0: f64) -> ThresholdFunction {
    let (_, q) = pq_constants(b0);
    let (delta, r, slope) = (DEFAULT_DELTA, DEFAULT_RADIUS, DEFAULT_MID_SLOPE);
    ThresholdFunction {
        b0,
        q,
        delta,
        r,
        mid_slope: slope,
        breakpoints: vec![
            (-1.0, 0.0),
            (-b0, q - 0.5 + delta),
            (0.0, q / 2.0 + delta),
            (b0 - r, 0.5 - slope * r),
            (b0, 0.5),
            (b0 + r, 0.5 + slope * r),
            (1.0, q + DEFAULT_TOP_OFFSET),
        ],
    }
}

/// Linear interpolation between breakpoints, exact at the breakpoints.
pub fn threshold_eval(t: &ThresholdFunction, b: f64) -> f64 {
    let b = b.clamp(-1.0, 1.0);
    let k = t.segment(b);
    let (b1, v1) = t.breakpoints[k];
    let (b2, v2) = t.breakpoints[k + 1];
    if b == b2 {
        return v2;
    }
    if b == b1 {
        return v1;
    }
    (v1 + (v2 - v1) * (b - b1) / (b2 - b1)).clamp(0.0, 1.0)
}

/// Probability that THRESH⁻ cuts an edge with biases (b_i, b_j).
pub fn edge_soundness(t: &ThresholdFunction, b_i: f64, b_j: f64) -> f64 {
    let rho = rho_of_biases(b_i, b_j).value();
    let x_i = std_normal_quantile_ext(t.eval(b_i));
    let x_j = std_normal_quantile_ext(t.eval(b_j));
    let both_out = bvn_cdf(rho, x_i, x_j);
    let both_in = bvn_cdf(rho, -x_i, -x_j);
    (1.0 - both_out - both_in).clamp(0.0, 1.0)
}

/// Same value through the measure-space cut function.
pub fn edge_soundness_via_cut(t: &ThresholdFunction, b_i: f64, b_j: f64) -> f64 {
    gaussian_cut(rho_of_biases(b_i, b_j), t.eval(b_i), t.eval(b_j))
}

/// Result of one or many rounding trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundingOutcome {
    /// Best cut found (true = vertex in S).
    pub cut: Vec<bool>,
    pub cut_weight: f64,
    pub trials: usize,
    pub best_weight: f64,
    pub mean_weight: f64,
    /// Standard error of the mean over trials.
    pub std_error: f64,
    pub seed: u64,
}

/// Per-vertex data reused across trials.
struct Prepared {
    dim: usize,
    perp: Vec<Option<Vec<f64>>>,
    thresholds: Vec<f64>,
    fixed_side: Vec<bool>,
}

fn prepare(s: &SdpSolution, t: &ThresholdFunction) -> Prepared {
    let n = s.biases.len();
    let mut perp = Vec::with_capacity(n);
    let mut thresholds = Vec::with_capacity(n);
    let mut fixed_side = Vec::with_capacity(n);
    for i in 0..n {
        let v = &s.vectors[i + 1];
        let b = s.biases[i];
        let mut w: Vec<f64> = v.clone();
        w[0] -= b;
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        let ti = t.eval(b);
        thresholds.push(std_normal_quantile_ext(ti));
        fixed_side.push(ti <= 0.5);
        if norm > DEGENERATE_NORM {
            w.iter_mut().for_each(|x| *x /= norm);
            perp.push(Some(w));
        } else {
            perp.push(None);
        }
    }
    Prepared { dim: s.dim, perp, thresholds, fixed_side }
}

/// Standard Gaussian vector for (seed, trial), drawn by inverse-cdf from ChaCha8.
pub fn trial_gaussian_vector(seed: u64, trial: u64, dim: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    (0..dim)
        .map(|_| {
            let bits: u64 = rng.random::<u64>() >> 11;
            let u = (bits as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
            std_normal_quantile_ext(u)
        })
        .collect()
}

fn round_with(prep: &Prepared, seed: u64, trial: u64) -> Vec<bool> {
    let r = trial_gaussian_vector(seed, trial, prep.dim);
    prep.perp
        .iter()
        .enumerate()
        .map(|(i, p)| match p {
            Some(w) => {
                let dot: f64 = w.iter().zip(&r).map(|(a, b)| a * b).sum();
                dot >= prep.thresholds[i]
            }
            None => prep.fixed_side[i],
        })
        .collect()
}

/// Weight of edges with exactly one endpoint in S.
pub fn cut_weight(g: &WeightedGraph, side: &[bool]) -> f64 {
    g.edges
        .iter()
        .filter(|e| side[e.i] != side[e.j])
        .map(|e| e.w)
        .sum()
}

/// One THRESH⁻ trial (stream 0 of `seed`).
pub fn thresh_minus_round(
    g: &WeightedGraph,
    s: &SdpSolution,
    t: &ThresholdFunction,
    seed: u64,
) -> RoundingOutcome {
    round_trials(g, s, t, seed, 1)
}

/// Independent trials keyed by (seed, trial index); best-of with ties to the lower index.
pub fn round_trials(
    g: &WeightedGraph,
    s: &SdpSolution,
    t: &ThresholdFunction,
    seed: u64,
    trials: usize,
) -> RoundingOutcome {
    let prep = prepare(s, t);
    let trials = trials.max(1);
    let weights: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|k| cut_weight(g, &round_with(&prep, seed, k)))
        .collect();
    let mut best = 0usize;
    for (k, &w) in weights.iter().enumerate() {
        if w > weights[best] {
            best = k;
        }
    }
    let mean = weights.iter().sum::<f64>() / trials as f64;
    let var = if trials > 1 {
        weights.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (trials - 1) as f64
    } else {
        0.0
    };
    let cut = round_with(&prep, seed, best as u64);
    RoundingOutcome {
        cut_weight: cut_weight(g, &cut),
        cut,
        trials,
        best_weight: weights[best],
        mean_weight: mean,
        std_error: (var / trials as f64).sqrt(),
        seed,
    }
}

/// Σ_e w_e s(b_i, b_j).
pub fn analytic_expected_cut(g: &WeightedGraph, s: &SdpSolution, t: &ThresholdFunction) -> f64 {
    g.edges
        .iter()
        .map(|e| e.w * edge_soundness(t, s.biases[e.i], s.biases[e.j]))
        .sum()
}

/// p·b̄ + q, where b̄ is the weighted mean of (b_i + b_j)/2 over edges.
pub fn certified_bound(g: &WeightedGraph, s: &SdpSolution, b0: f64) -> f64 {
    let (p, q) = pq_constants(b0);
    p * mean_bias(g, s) + q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::compute_critical_constants;
    use crate::sdp::{Edge, WeightedGraph};
    use proptest::prelude::*;

    fn table_threshold() -> ThresholdFunction {
        default_threshold(compute_critical_constants().b_star)
    }

    #[test]
    fn rho_special_cases() {
        for &b in &[0.0, 0.3, 0.9] {
            assert!((rho_of_biases(-b, b).value() + 1.0).abs() < 1e-15);
            assert_eq!(rho_of_biases(b, 1.0).value(), 0.0);
        }
        assert_eq!(rho_of_biases(-1.0, 1.0).value(), 0.0);
        let c = compute_critical_constants();
        // ρ(b, b) = -(1-b)/(1+b) evaluated independently.
        let direct = -(1.0 - c.b_star) / (1.0 + c.b_star);
        assert!((rho_of_biases(c.b_star, c.b_star).value() - direct).abs() < 1e-15);
        assert!((direct - c.rho_star).abs() < 1e-12);
    }

    #[test]
    fn pq_reference_values() {
        let (p, q) = pq_constants(0.184_022_0);
        assert!((p + 0.626_693_8).abs() < 1e-6);
        assert!((q - 0.857_344_7).abs() < 1e-6);
        let b0 = 0.2;
        let (p, q) = pq_constants(b0);
        let s0 = rho_of_biases(b0, b0).value().acos() / PI;
        assert!((p * b0 + q - s0).abs() < 1e-12);
    }

    #[test]
    fn table_values() {
        let t = table_threshold();
        assert_eq!(t.eval(-1.0), 0.0);
        assert_eq!(t.eval(1.0), t.q + 0.0095);
        assert_eq!(t.eval(0.0), t.q / 2.0 + 0.001);
        assert_eq!(t.eval(t.b0), 0.5);
        assert!((t.eval(t.b0 + t.r) - (0.5 + 0.42 * t.r)).abs() < 1e-15);
        assert!((t.eval(t.b0 - t.r) - (0.5 - 0.42 * t.r)).abs() < 1e-15);
        let m = 0.5 * (-1.0 - t.b0);
        let avg = 0.5 * (t.eval(-1.0) + t.eval(-t.b0));
        assert!((t.eval(m) - avg).abs() < 1e-15);
        for w in t.breakpoints.windows(2) {
            assert!(w[1].0 > w[0].0 && w[1].1 > w[0].1);
        }
        assert!((t.slope_at(t.b0 - 0.5 * t.r) - 0.42).abs() < 1e-9);
        assert!((t.slope_at(t.b0 + 0.5 * t.r) - 0.42).abs() < 1e-9);
    }

    #[test]
    fn soundness_special_cases() {
        let t = table_threshold();
        let s00 = edge_soundness(&t, t.b0, t.b0);
        let expect = rho_of_biases(t.b0, t.b0).value().acos() / PI;
        assert!((s00 - expect).abs() < 1e-12);
        for &b in &[-0.5, 0.0, 0.3, 0.9] {
            let (tb, t1) = (t.eval(b), t.eval(1.0));
            assert!((edge_soundness(&t, b, 1.0) - (tb + t1 - 2.0 * tb * t1)).abs() < 1e-12);
        }
        for &b in &[0.0, 0.2, 0.6, 1.0] {
            let v = 1.0 - (t.eval(b) + t.eval(-b) - 1.0).abs();
            assert!((edge_soundness(&t, -b, b) - v).abs() < 1e-12);
        }
    }

    #[test]
    fn condition_at_one_is_nearly_tight() {
        let c = compute_critical_constants();
        let t = table_threshold();
        let t1 = t.eval(1.0);
        let slack = t1 - t1 * t1 - (c.p_star + c.q_star) / 2.0;
        assert!(slack >= 0.0 && slack <= 3e-4, "slack {slack}");
    }

    #[test]
    fn diagonal_derivative_is_p() {
        let t = table_threshold();
        let (p, _) = pq_constants(t.b0);
        let h = 1e-5;
        let fd = (edge_soundness(&t, t.b0 + h, t.b0 + h) - edge_soundness(&t, t.b0 - h, t.b0 - h)) / (2.0 * h);
        assert!((fd - p).abs() < 1e-5, "fd {fd} p {p}");
    }

    #[test]
    fn antipodal_perpendicular_edge_is_always_cut() {
        let t = table_threshold();
        let b = t.b0;
        let c = (1.0 - b * b).sqrt();
        let s = SdpSolution {
            dim: 2,
            vectors: vec![vec![1.0, 0.0], vec![b, c], vec![b, -c]],
            biases: vec![b, b],
        };
        let g = WeightedGraph::new(2, vec![Edge { i: 0, j: 1, w: 1.0 }]).unwrap();
        let out = round_trials(&g, &s, &t, 5, 200);
        assert_eq!(out.mean_weight, 1.0);
        let again = thresh_minus_round(&g, &s, &t, 9);
        assert_eq!(again, thresh_minus_round(&g, &s, &t, 9));
    }

    #[test]
    fn single_edge_integral_bound() {
        let t = table_threshold();
        let s = SdpSolution {
            dim: 2,
            vectors: vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![-1.0, 0.0]],
            biases: vec![1.0, -1.0],
        };
        let g = WeightedGraph::new(2, vec![Edge { i: 0, j: 1, w: 1.0 }]).unwrap();
        let a = analytic_expected_cut(&g, &s, &t);
        let t1 = t.eval(1.0);
        assert!((a - t1).abs() < 1e-12);
        let empty = WeightedGraph::empty(3);
        assert_eq!(analytic_expected_cut(&empty, &s, &t), 0.0);
    }

    #[test]
    fn bound_at_centre_is_s0() {
        let c = compute_critical_constants();
        let b = c.b_star;
        let cc = (1.0 - b * b).sqrt();
        let s = SdpSolution {
            dim: 2,
            vectors: vec![vec![1.0, 0.0], vec![b, cc], vec![b, -cc]],
            biases: vec![b, b],
        };
        let g = WeightedGraph::new(2, vec![Edge { i: 0, j: 1, w: 1.0 }]).unwrap();
        let bound = certified_bound(&g, &s, b);
        assert!((bound - c.s_star).abs() < 1e-12);
        assert!((bound - 0.742).abs() < 1e-3);
    }

    proptest! {
        #[test]
        fn soundness_two_paths(bi in -1.0f64..1.0, bj in -1.0f64..1.0) {
            prop_assume!(bi + bj >= 0.0);
            let t = table_threshold();
            let a = edge_soundness(&t, bi, bj);
            let b = edge_soundness_via_cut(&t, bi, bj);
            prop_assert!((a - b).abs() <= 1e-12, "{} vs {}", a, b);
            prop_assert_eq!(a, edge_soundness(&t, bj, bi));
        }

        #[test]
        fn threshold_monotone_continuous(b in -1.0f64..1.0, d in 0.0f64..1e-3) {
            let t = table_threshold();
            let b2 = (b + d).min(1.0);
            prop_assert!(t.eval(b2) >= t.eval(b));
            prop_assert!(t.eval(b2) - t.eval(b) <= 0.5 * d + 1e-15);
        }

        #[test]
        fn rho_in_range(bi in -1.0f64..1.0, bj in -1.0f64..1.0) {
            prop_assume!(bi + bj >= 0.0);
            let r = rho_of_biases(bi, bj).value();
            prop_assert!((-1.0..=0.0).contains(&r));
        }
    }
}
