//! Low-rank augmented Lagrangian solver.
//!
//! Each vertex carries a unit row y_i ∈ R^k with v₀ = e₁. Per edge the
//! constraint c_e = 1 − y_i[0] − y_j[0] + y_i·y_j is priced by a multiplier
//! and a quadratic penalty; the inner problem is solved by Riemannian
//! gradient descent on the product of spheres with Barzilai-Borwein steps.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{greedy_independent_set, sdp_objective, SdpSolution, WeightedGraph};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Factor rank; defaults to min(n+1, ⌈√(2n)⌉+1).
    pub rank: Option<usize>,
    pub feas_tol: f64,
    pub obj_tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub seed: u64,
    /// Independent set offered as a warm-start candidate.
    pub warm_start: Option<Vec<usize>>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rank: None,
            feas_tol: 1e-7,
            obj_tol: 1e-5,
            max_outer: 80,
            max_inner: 4000,
            seed: 0,
            warm_start: None,
        }
    }
}

pub fn default_rank(n: usize) -> usize {
    let r = ((2.0 * n as f64).sqrt().ceil() as usize) + 1;
    r.min(n + 1).max(2)
}

struct Problem<'a> {
    n: usize,
    k: usize,
    edges: Vec<(usize, usize, f64)>,
    _graph: &'a WeightedGraph,
}

impl Problem<'_> {
    fn row<'b>(&self, y: &'b [f64], i: usize) -> &'b [f64] {
        &y[i * self.k..(i + 1) * self.k]
    }

    fn constraints(&self, y: &[f64]) -> Vec<f64> {
        self.edges
            .iter()
            .map(|&(i, j, _)| {
                let (a, b) = (self.row(y, i), self.row(y, j));
                1.0 - a[0] - b[0] + dot(a, b)
            })
            .collect()
    }

    /// Lagrangian value and Euclidean gradient.
    fn lagrangian(&self, y: &[f64], mult: &[f64], sigma: f64, grad: Option<&mut Vec<f64>>) -> f64 {
        let k = self.k;
        let mut value = 0.0;
        let mut g = grad;
        if let Some(g) = g.as_deref_mut() {
            g.iter_mut().for_each(|x| *x = 0.0);
        }
        for (e, &(i, j, w)) in self.edges.iter().enumerate() {
            let (a, b) = (self.row(y, i), self.row(y, j));
            let ab = dot(a, b);
            let c = 1.0 - a[0] - b[0] + ab;
            value += 0.5 * w * (ab - 1.0) - mult[e] * c + 0.5 * sigma * c * c;
            if let Some(g) = g.as_deref_mut() {
                let coef = sigma * c - mult[e];
                for t in 0..k {
                    let (ya, yb) = (y[i * k + t], y[j * k + t]);
                    let shift = if t == 0 { 1.0 } else { 0.0 };
                    g[i * k + t] += 0.5 * w * yb + coef * (yb - shift);
                    g[j * k + t] += 0.5 * w * ya + coef * (ya - shift);
                }
            }
        }
        value
    }

    /// Projects a Euclidean gradient onto the tangent space; returns max row norm.
    fn tangent(&self, y: &[f64], g: &mut [f64]) -> f64 {
        let k = self.k;
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            let yi = &y[i * k..(i + 1) * k];
            let gi = &mut g[i * k..(i + 1) * k];
            let d = dot(yi, gi);
            let mut norm = 0.0;
            for t in 0..k {
                gi[t] -= d * yi[t];
                norm += gi[t] * gi[t];
            }
            worst = worst.max(norm.sqrt());
        }
        worst
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalise_rows(y: &mut [f64], k: usize) {
    for row in y.chunks_mut(k) {
        let norm = dot(row, row).sqrt();
        if norm > 0.0 {
            row.iter_mut().for_each(|x| *x /= norm);
        } else {
            row[0] = 1.0;
        }
    }
}

/// Solves the SDP; the result is the better of the optimised point and the
/// best integral warm-start candidate.
pub fn solve_sdp(g: &WeightedGraph, cfg: &SolverConfig) -> Result<SdpSolution> {
    let n = g.n;
    let k = cfg.rank.unwrap_or_else(|| default_rank(n)).max(2);
    if g.edges.is_empty() {
        return Ok(SdpSolution::trivial(n, k));
    }

    let mut candidates = vec![greedy_independent_set(g)];
    if let Some(hint) = &cfg.warm_start {
        if g.independent_set_check(hint).0 {
            candidates.push(hint.clone());
        }
    }
    let mut best_set = candidates[0].clone();
    let mut best_weight = g.independent_set_check(&best_set).1;
    for c in &candidates[1..] {
        let w = g.independent_set_check(c).1;
        if w > best_weight {
            best_weight = w;
            best_set = c.clone();
        }
    }
    let integral = SdpSolution::integral(n, &best_set, k);

    let m = g.edges.len() as f64;
    let problem = Problem {
        n,
        k,
        edges: g.edges.iter().map(|e| (e.i, e.j, e.w * m)).collect(),
        _graph: g,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut y = vec![0.0; n * k];
    let mut in_set = vec![false; n];
    best_set.iter().for_each(|&v| in_set[v] = true);
    for i in 0..n {
        for t in 0..k {
            let noise: f64 = StandardNormal.sample(&mut rng);
            y[i * k + t] = 0.3 * noise;
        }
        y[i * k] += if in_set[i] { -1.0 } else { 1.0 };
    }
    normalise_rows(&mut y, k);

    let mut mult = vec![0.0; problem.edges.len()];
    let mut sigma = 1.0;
    let mut prev_violation = f64::INFINITY;
    let mut inner_tol = 1e-2;
    let stationarity: f64 = 1e-6;
    let mut step = 0.1;
    let mut iterations = 0;
    let mut converged = false;
    let mut violation = f64::INFINITY;

    for _outer in 0..cfg.max_outer {
        let (inner_iters, gnorm, last_step) =
            minimise_inner(&problem, &mut y, &mult, sigma, inner_tol, cfg.max_inner, step);
        step = last_step;
        iterations += inner_iters;
        let c = problem.constraints(&y);
        violation = c.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        if violation <= cfg.feas_tol && gnorm <= stationarity.max(inner_tol) && inner_tol <= stationarity {
            converged = true;
            break;
        }
        for (l, ce) in mult.iter_mut().zip(&c) {
            *l -= sigma * ce;
        }
        if violation > 0.25 * prev_violation {
            sigma = (sigma * 4.0).min(1e7);
        }
        prev_violation = violation;
        inner_tol = (inner_tol * 0.2).max(stationarity);
    }

    if !converged {
        return Err(Error::NonConvergence { iterations, violation });
    }
    let rows: Vec<Vec<f64>> = y.chunks(k).map(|r| r.to_vec()).collect();
    let solution = SdpSolution::from_vertex_vectors(k, rows);
    let value = sdp_objective(g, &solution)?;
    if value >= best_weight {
        Ok(solution)
    } else {
        Ok(integral)
    }
}

/// Returns (iterations, final tangent-gradient norm, last step size).
fn minimise_inner(
    p: &Problem,
    y: &mut Vec<f64>,
    mult: &[f64],
    sigma: f64,
    tol: f64,
    max_iters: usize,
    initial_step: f64,
) -> (usize, f64, f64) {
    let k = p.k;
    let mut grad = vec![0.0; y.len()];
    let mut value = p.lagrangian(y, mult, sigma, Some(&mut grad));
    let mut gnorm = p.tangent(y, &mut grad);
    let mut history = std::collections::VecDeque::from(vec![value]);
    let mut step = initial_step;
    let mut trial = vec![0.0; y.len()];
    let mut trial_grad = vec![0.0; y.len()];
    for it in 0..max_iters {
        if gnorm <= tol {
            return (it, gnorm, step);
        }
        let reference = history.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let gg = dot(&grad, &grad);
        let mut accepted = false;
        let mut trial_value = value;
        for _ in 0..50 {
            for (t, (a, b)) in trial.iter_mut().zip(y.iter().zip(&grad)) {
                *t = a - step * b;
            }
            normalise_rows(&mut trial, k);
            trial_value = p.lagrangian(&trial, mult, sigma, None);
            if trial_value <= reference - 1e-4 * step * gg {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return (it, gnorm, step.max(1e-12));
        }
        p.lagrangian(&trial, mult, sigma, Some(&mut trial_grad));
        let new_norm = p.tangent(&trial, &mut trial_grad);
        let mut ss = 0.0;
        let mut sy = 0.0;
        for idx in 0..y.len() {
            let s = trial[idx] - y[idx];
            let d = trial_grad[idx] - grad[idx];
            ss += s * s;
            sy += s * d;
        }
        std::mem::swap(y, &mut trial);
        std::mem::swap(&mut grad, &mut trial_grad);
        value = trial_value;
        gnorm = new_norm;
        history.push_back(value);
        if history.len() > 8 {
            history.pop_front();
        }
        step = if sy.abs() > 1e-300 { (ss / sy.abs()).clamp(1e-10, 1e3) } else { step * 2.0 };
    }
    (max_iters, gnorm, step)
}
