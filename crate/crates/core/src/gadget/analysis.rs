//! Exact enumeration: maximum cuts, influences and the noise operator.

use super::{CutAssignment, GadgetGraph};
use crate::error::{Error, Result};
use crate::gaussian::Correlation;

pub const BRUTE_FORCE_MAX_VERTICES: usize = 24;
pub const QUASIRANDOM_MAX_VERTICES: usize = 20;
pub const NOISE_OPERATOR_MAX_R: usize = 12;
/// Values within this distance count as ties.
const TIE_TOL: f64 = 1e-12;

/// Σ of weights of bichromatic pairs; loops are never cut.
pub fn cut_value(g: &GadgetGraph, a: &CutAssignment) -> Result<f64> {
    let n = g.vertex_count();
    if a.member.len() < n {
        return Err(Error::MissingAssignment(a.member.len()));
    }
    let mut total = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            if a.member[i] != a.member[j] {
                total += g.weight(i, j);
            }
        }
    }
    Ok(total)
}

fn dense_weights(g: &GadgetGraph) -> Vec<Vec<f64>> {
    let n = g.vertex_count();
    (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { g.weight(i, j) }).collect()).collect()
}

/// Walks every assignment with vertex 0 on side `false` in Gray-code order,
/// calling `visit(side, value)` after each step (including the start).
fn gray_walk<F: FnMut(&[bool], f64)>(w: &[Vec<f64>], mut visit: F) {
    let n = w.len();
    let mut side = vec![false; n];
    // gain[v]: change of the cut value if v switches sides.
    let mut gain: Vec<f64> = (0..n).map(|v| w[v].iter().sum()).collect();
    let mut value = 0.0;
    visit(&side, value);
    if n < 2 {
        return;
    }
    let steps: u64 = 1 << (n - 1);
    for step in 1..steps {
        let v = 1 + step.trailing_zeros() as usize;
        value += gain[v];
        side[v] = !side[v];
        gain[v] = -gain[v];
        for u in 0..n {
            if u != v {
                let delta = 2.0 * w[u][v];
                gain[u] += if side[u] == side[v] { delta } else { -delta };
            }
        }
        visit(&side, value);
    }
}

/// Vertex 0 is the most significant position, so integer order is lexicographic order.
fn lex_key(side: &[bool]) -> u64 {
    side.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
}

/// Exact maximum cut; ties go to the lexicographically smallest assignment.
pub fn brute_force_max_cut(g: &GadgetGraph) -> Result<(CutAssignment, f64)> {
    let n = g.vertex_count();
    if n > BRUTE_FORCE_MAX_VERTICES {
        return Err(Error::BudgetExceeded { what: "brute-force vertices", size: n, limit: BRUTE_FORCE_MAX_VERTICES });
    }
    let w = dense_weights(g);
    let mut best_value = f64::NEG_INFINITY;
    let mut best_key = u64::MAX;
    gray_walk(&w, |side, value| {
        let key = lex_key(side);
        if value > best_value + TIE_TOL || (value >= best_value - TIE_TOL && key < best_key) {
            best_value = best_value.max(value);
            best_key = key;
        }
    });
    let member: Vec<bool> = (0..n).map(|v| (best_key >> (n - 1 - v)) & 1 == 1).collect();
    let assignment = CutAssignment { member };
    let exact = cut_value(g, &assignment)?;
    Ok((assignment, exact))
}

/// Inf_j of a Boolean function on Ω^r under the product of `marginal`.
pub fn influence_with_marginal(f: &[bool], marginal: &[f64], r: usize, j: usize) -> f64 {
    let d = marginal.len();
    let stride = d.pow((r - 1 - j) as u32);
    let mut total = 0.0;
    for base in 0..f.len() {
        // Visit each fibre once, from its representative with digit j = 0.
        if !(base / stride).is_multiple_of(d) {
            continue;
        }
        let mut rest_prob = 1.0;
        let mut code = base;
        for k in (0..r).rev() {
            if k != j {
                rest_prob *= marginal[code % d];
            }
            code /= d;
        }
        let mean: f64 = (0..d).map(|a| marginal[a] * f[base + a * stride] as u8 as f64).sum();
        total += rest_prob * mean * (1.0 - mean);
    }
    total
}

/// Inf_j for uniform bits: E[(f(x) − f(x ⊕ e_j))²] / 4.
pub fn influence(f: &[bool], r: usize, j: usize) -> f64 {
    influence_with_marginal(f, &[0.5, 0.5], r, j)
}

/// (T_ρ f)(x) = E[f(y)] for y ρ-correlated with x, applied coordinatewise.
pub fn noise_operator(f: &[f64], rho: Correlation, r: usize) -> Result<Vec<f64>> {
    if r > NOISE_OPERATOR_MAX_R {
        return Err(Error::BudgetExceeded { what: "noise operator dimension", size: r, limit: NOISE_OPERATOR_MAX_R });
    }
    if f.len() != 1 << r {
        return Err(Error::DimensionMismatch { expected: 1 << r, found: f.len() });
    }
    let keep = (1.0 + rho.value()) / 2.0;
    let mut out = f.to_vec();
    for k in 0..r {
        let bit = 1 << k;
        let prev = out.clone();
        for x in 0..out.len() {
            out[x] = keep * prev[x] + (1.0 - keep) * prev[x ^ bit];
        }
    }
    Ok(out)
}

fn max_part_influence(g: &GadgetGraph, side: &[bool]) -> f64 {
    let per = g.per_part();
    let mut worst: f64 = 0.0;
    for p in 0..g.parts {
        let f = &side[p * per..(p + 1) * per];
        for j in 0..g.r {
            worst = worst.max(influence_with_marginal(f, &g.symbol_marginal, g.r, j));
        }
    }
    worst
}

/// Best cut among assignments whose every part has all influences ≤ τ.
pub fn quasirandom_max_cut(g: &GadgetGraph, tau: f64) -> Result<f64> {
    let n = g.vertex_count();
    if n > QUASIRANDOM_MAX_VERTICES {
        return Err(Error::BudgetExceeded { what: "quasirandom enumeration vertices", size: n, limit: QUASIRANDOM_MAX_VERTICES });
    }
    let w = dense_weights(g);
    let mut best = f64::NEG_INFINITY;
    gray_walk(&w, |side, value| {
        if value > best + TIE_TOL && max_part_influence(g, side) <= tau + TIE_TOL {
            best = value;
        }
    });
    Ok(best.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;
    use crate::gaussian::compute_critical_constants;
    use proptest::prelude::*;

    fn corr(v: f64) -> Correlation {
        Correlation::new(v).unwrap()
    }

    #[test]
    fn bipartite_tripartite_cube_is_fully_cut() {
        let g = build_tripartite_cube(corr(-1.0), 1).unwrap();
        let (_, v) = brute_force_max_cut(&g).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_edge() {
        let g = build_noisy_cube(corr(-1.0), 1).unwrap();
        let (a, v) = brute_force_max_cut(&g).unwrap();
        assert_eq!(v, 1.0);
        assert_eq!(a.member, vec![false, true]);
    }

    #[test]
    fn known_iset_enumeration_matches_exhaustive_scan() {
        let rs = compute_critical_constants().rho_star;
        let g = build_known_iset_gadget(corr(rs), 0.9, 1).unwrap();
        let (a, v) = brute_force_max_cut(&g).unwrap();
        let mut scan: f64 = 0.0;
        for mask in 0..16u32 {
            let member = (0..4).map(|k| (mask >> k) & 1 == 1).collect();
            scan = scan.max(cut_value(&g, &CutAssignment { member }).unwrap());
        }
        assert!((v - scan).abs() < 1e-12);
        assert!(!a.member[0]);
    }

    #[test]
    fn cut_value_basics() {
        let g = build_noisy_cube(corr(-0.4), 2).unwrap();
        assert_eq!(cut_value(&g, &CutAssignment { member: vec![false; 4] }).unwrap(), 0.0);
        assert!(matches!(cut_value(&g, &CutAssignment { member: vec![false; 3] }), Err(Error::MissingAssignment(3))));
        let a = CutAssignment { member: vec![true, false, false, true] };
        let b = CutAssignment { member: a.member.iter().map(|x| !x).collect() };
        assert_eq!(cut_value(&g, &a).unwrap(), cut_value(&g, &b).unwrap());
    }

    #[test]
    fn dictator_cuts_exact() {
        for r in 1..=3 {
            for &rho in &[-0.9, -0.5, -0.2] {
                let g = build_noisy_cube(corr(rho), r).unwrap();
                let v = cut_value(&g, &g.dictator(0)).unwrap();
                assert!((v - (1.0 - rho) / 2.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn influences() {
        let dictator: Vec<bool> = (0..8usize).map(|x| (x >> 2) & 1 == 1).collect();
        assert_eq!(influence(&dictator, 3, 0), 0.25);
        assert_eq!(influence(&dictator, 3, 1), 0.0);
        assert_eq!(influence(&[true; 8], 3, 2), 0.0);
        let majority: Vec<bool> = (0..8u32).map(|x| x.count_ones() >= 2).collect();
        for j in 0..3 {
            // Enumerated directly: flipping j changes the majority on half the inputs.
            let direct: f64 = (0..8usize)
                .map(|x| {
                    let y = x ^ (1 << (2 - j));
                    if majority[x] != majority[y] { 1.0 } else { 0.0 }
                })
                .sum::<f64>()
                / 8.0
                / 4.0;
            assert_eq!(influence(&majority, 3, j), direct);
            assert_eq!(direct, 0.125);
        }
    }

    #[test]
    fn noise_operator_cases() {
        let f: Vec<f64> = (0..8).map(|x| (x * x % 5) as f64).collect();
        assert_eq!(noise_operator(&f, corr(1.0), 3).unwrap(), f);
        let mean = f.iter().sum::<f64>() / 8.0;
        for v in noise_operator(&f, corr(0.0), 3).unwrap() {
            assert!((v - mean).abs() < 1e-12);
        }
        let t = noise_operator(&f, corr(-0.6), 3).unwrap();
        assert!((t.iter().sum::<f64>() / 8.0 - mean).abs() < 1e-12);
        assert!(noise_operator(&f, corr(0.5), 13).is_err());
    }

    #[test]
    fn quasirandom_extremes() {
        let g = build_tripartite_cube(corr(-0.3), 2).unwrap();
        let q0 = quasirandom_max_cut(&g, 0.0).unwrap();
        assert!((q0 - 2.0 / 3.0).abs() < 1e-12);
        let full = quasirandom_max_cut(&g, 0.25).unwrap();
        let (_, bf) = brute_force_max_cut(&g).unwrap();
        assert!((full - bf).abs() < 1e-12);
        // A single part: constant functions cut nothing.
        assert_eq!(quasirandom_max_cut(&build_noisy_cube(corr(-0.3), 4).unwrap(), 0.0).unwrap(), 0.0);
        assert!(brute_force_max_cut(&build_tripartite_cube(corr(-0.3), 4).unwrap()).is_err());
        assert!(quasirandom_max_cut(&build_noisy_cube(corr(-0.3), 5).unwrap(), 0.1).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn brute_force_dominates_random_cuts(rho in -0.99f64..0.0, alpha in 0.0f64..1.0, mask in 0u32..16) {
            let g = build_known_iset_gadget(corr(rho), alpha, 1).unwrap();
            let (_, best) = brute_force_max_cut(&g).unwrap();
            let member = (0..4).map(|k| (mask >> k) & 1 == 1).collect();
            let value = cut_value(&g, &CutAssignment { member }).unwrap();
            prop_assert!(value <= best + 1e-12);
        }
    }
}
