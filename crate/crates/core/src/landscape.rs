//! Gaussian cut landscapes for the tripartite and bipartite gadgets.
//!
//! Gradients follow the co-cut convention: they differentiate Σ co_cut, the
//! complement of the cut objective, so stationary points coincide and signs
//! flip.

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{co_cut, g_func, gaussian_cut, k_func, std_normal_cdf, std_normal_pdf, Correlation};

/// Mesh for the 1-D edge scans on each face.
pub const FACE_EDGE_MESH: f64 = 1e-3;
/// Mesh for the 2-D interior scan of each face.
pub const FACE_INTERIOR_MESH: f64 = 0.02;
pub const NEWTON_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripartitePoint {
    pub mu: [f64; 3],
}

impl TripartitePoint {
    pub fn new(mu: [f64; 3]) -> Result<Self> {
        if mu.iter().all(|m| (0.0..=1.0).contains(m)) {
            Ok(Self { mu })
        } else {
            Err(Error::Domain(format!("point {mu:?} leaves the unit cube")))
        }
    }

    fn interior(&self) -> bool {
        self.mu.iter().all(|&m| m > 0.0 && m < 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LocationClass {
    Interior,
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeReport {
    pub maximizer: Vec<f64>,
    pub value: f64,
    pub location_class: LocationClass,
    /// Gradient norm for interior maxima, refinement gap on the boundary.
    pub residual: f64,
}

pub fn f_cut_tripartite(rho: Correlation, p: &TripartitePoint) -> f64 {
    let [a, b, c] = p.mu;
    // Sort first so every permutation sums identical terms in the same order.
    let mut s = [a, b, c];
    s.sort_by(f64::total_cmp);
    gaussian_cut(rho, s[0], s[1]) + gaussian_cut(rho, s[0], s[2]) + gaussian_cut(rho, s[1], s[2])
}

/// Gradient of Σ co_cut: component i is G(K(μᵢ,μⱼ)) + G(K(μᵢ,μₖ)).
pub fn grad_f_tripartite(rho: Correlation, p: &TripartitePoint) -> Result<[f64; 3]> {
    if !p.interior() {
        return Err(Error::Domain("gradient needs an interior point".into()));
    }
    let mu = p.mu;
    let mut out = [0.0; 3];
    for (i, slot) in out.iter_mut().enumerate() {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        *slot = g_func(k_func(rho, mu[i], mu[j])?) + g_func(k_func(rho, mu[i], mu[k])?);
    }
    Ok(out)
}

/// Solves the stationary system in Gaussian space (diagonal −2ρ, off-diagonals 1).
pub fn stationary_solve(rho: Correlation) -> Result<TripartitePoint> {
    let r = rho.value();
    if !(r > -1.0 && r <= 0.0) {
        return Err(Error::Domain(format!("stationary system needs rho in (-1, 0], got {r}")));
    }
    let m = Matrix3::from_fn(|i, j| if i == j { -2.0 * r } else { 1.0 });
    // Eigenvalues are 2 − 2ρ and −1 − 2ρ.
    if (-1.0 - 2.0 * r).abs() < 1e-12 {
        return Err(Error::SingularSystem { rho: r });
    }
    let t = m.lu().solve(&Vector3::zeros()).ok_or(Error::SingularSystem { rho: r })?;
    TripartitePoint::new([std_normal_cdf(t[0]), std_normal_cdf(t[1]), std_normal_cdf(t[2])])
}

/// Golden-section maximisation of a unimodal-ish function on [lo, hi].
fn golden_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Better candidate: larger value, ties to the lexicographically smaller point.
fn better(a: (Vec<f64>, f64), b: (Vec<f64>, f64)) -> (Vec<f64>, f64) {
    if b.1 > a.1 || (b.1 == a.1 && b.0.iter().zip(&a.0).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()) == Some(std::cmp::Ordering::Less)) {
        b
    } else {
        a
    }
}

fn grid(step: f64) -> Vec<f64> {
    let n = (1.0 / step).round() as usize;
    (0..=n).map(|k| k as f64 / n as f64).collect()
}

/// Exact Cut_ρ(fixed, μ) on a face: Cut(0, μ) = μ and Cut(1, μ) = 1 − μ.
fn face_value(rho: Correlation, fixed: f64, u: f64, v: f64) -> f64 {
    let edge = |m: f64| if fixed == 0.0 { m } else { 1.0 - m };
    edge(u) + edge(v) + gaussian_cut(rho, u, v)
}

/// Scans all six faces of the cube; value is unnormalised (maximum 2).
pub fn boundary_max_tripartite(rho: Correlation) -> LandscapeReport {
    let edge_grid = grid(FACE_EDGE_MESH);
    let inner_grid = grid(FACE_INTERIOR_MESH);
    let faces: Vec<(usize, f64)> = (0..3).flat_map(|axis| [(axis, 0.0), (axis, 1.0)]).collect();
    let embed = |axis: usize, fixed: f64, u: f64, v: f64| -> Vec<f64> {
        let mut p = vec![0.0; 3];
        let others: Vec<usize> = (0..3).filter(|&k| k != axis).collect();
        p[axis] = fixed;
        p[others[0]] = u;
        p[others[1]] = v;
        p
    };
    let per_face: Vec<((Vec<f64>, f64), f64)> = faces
        .par_iter()
        .map(|&(axis, fixed)| {
            let mut best = (vec![f64::INFINITY; 3], f64::NEG_INFINITY);
            // The four edges of the face at the fine mesh.
            for &e in &[0.0, 1.0] {
                for &m in &edge_grid {
                    best = better(best, (embed(axis, fixed, e, m), face_value(rho, fixed, e, m)));
                    best = better(best, (embed(axis, fixed, m, e), face_value(rho, fixed, m, e)));
                }
            }
            for &u in &inner_grid {
                for &v in &inner_grid {
                    best = better(best, (embed(axis, fixed, u, v), face_value(rho, fixed, u, v)));
                }
            }
            // Coordinate-wise golden refinement around the best grid point.
            let others: Vec<usize> = (0..3).filter(|&k| k != axis).collect();
            let mut point = best.0.clone();
            let grid_value = best.1;
            for _ in 0..3 {
                for &k in &others {
                    let lo = (point[k] - FACE_INTERIOR_MESH).max(0.0);
                    let hi = (point[k] + FACE_INTERIOR_MESH).min(1.0);
                    let eval = |m: f64| {
                        let mut q = point.clone();
                        q[k] = m;
                        face_value(rho, fixed, q[others[0]], q[others[1]])
                    };
                    let (m, val) = golden_max(eval, lo, hi, 1e-9);
                    if val > eval(point[k]) {
                        point[k] = m;
                    }
                }
            }
            let refined = face_value(rho, fixed, point[others[0]], point[others[1]]);
            let candidate = if refined > grid_value { (point, refined) } else { best.clone() };
            (candidate, (refined - grid_value).abs())
        })
        .collect();
    let mut best = (vec![f64::INFINITY; 3], f64::NEG_INFINITY);
    let mut gap: f64 = 0.0;
    for (cand, g) in per_face {
        gap = gap.max(g);
        best = better(best, cand);
    }
    LandscapeReport { maximizer: best.0, value: best.1, location_class: LocationClass::Boundary, residual: gap }
}

/// Damped Newton on the co-cut gradient with a finite-difference Jacobian.
pub fn newton_refine(rho: Correlation, start: TripartitePoint) -> Result<(TripartitePoint, f64)> {
    let mut mu = start.mu;
    let norm = |g: &[f64; 3]| g.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut g = grad_f_tripartite(rho, &TripartitePoint { mu })?;
    for _ in 0..100 {
        if norm(&g) <= NEWTON_TOL {
            break;
        }
        let h = 1e-6;
        let mut jac = Matrix3::zeros();
        for k in 0..3 {
            let (mut up, mut dn) = (mu, mu);
            up[k] += h;
            dn[k] -= h;
            let gu = grad_f_tripartite(rho, &TripartitePoint { mu: up })?;
            let gd = grad_f_tripartite(rho, &TripartitePoint { mu: dn })?;
            for i in 0..3 {
                jac[(i, k)] = (gu[i] - gd[i]) / (2.0 * h);
            }
        }
        let rhs = Vector3::new(-g[0], -g[1], -g[2]);
        let step = match jac.lu().solve(&rhs) {
            Some(s) => s,
            // Coordinate-descent fallback along the negative gradient.
            None => Vector3::new(-g[0], -g[1], -g[2]) * 1e-2,
        };
        let mut damping = 1.0;
        loop {
            let trial: [f64; 3] = std::array::from_fn(|k| (mu[k] + damping * step[k]).clamp(1e-12, 1.0 - 1e-12));
            let gt = grad_f_tripartite(rho, &TripartitePoint { mu: trial })?;
            if norm(&gt) < norm(&g) || damping < 1e-8 {
                mu = trial;
                g = gt;
                break;
            }
            damping *= 0.5;
        }
    }
    Ok((TripartitePoint { mu }, norm(&g)))
}

/// Global maximiser of F_cut / 3 over the cube.
pub fn tripartite_max(rho: Correlation) -> LandscapeReport {
    let mut boundary = boundary_max_tripartite(rho);
    boundary.value /= 3.0;
    let r = rho.value();
    if r == -0.5 {
        return boundary;
    }
    let interior = stationary_solve(rho).and_then(|p| newton_refine(rho, p));
    match interior {
        Ok((point, residual)) => {
            let value = f_cut_tripartite(rho, &point) / 3.0;
            if value > boundary.value {
                LandscapeReport {
                    maximizer: point.mu.to_vec(),
                    value,
                    location_class: LocationClass::Interior,
                    residual,
                }
            } else {
                boundary
            }
        }
        Err(_) => boundary,
    }
}

/// α Cut_ρ(μ₁, μ₂) + (1 − α) Cut_ρ(μ₂, μ₂).
pub fn f_alpha_bipartite(rho: Correlation, alpha: f64, mu1: f64, mu2: f64) -> f64 {
    alpha * gaussian_cut(rho, mu1, mu2) + (1.0 - alpha) * gaussian_cut(rho, mu2, mu2)
}

/// Gradient of α co_cut(μ₁, μ₂) + (1 − α) co_cut(μ₂, μ₂).
pub fn grad_f_alpha(rho: Correlation, alpha: f64, mu1: f64, mu2: f64) -> Result<[f64; 2]> {
    if !(mu1 > 0.0 && mu1 < 1.0 && mu2 > 0.0 && mu2 < 1.0) {
        return Err(Error::Domain("gradient needs an interior point".into()));
    }
    let first = alpha * g_func(k_func(rho, mu1, mu2)?);
    let second = alpha * g_func(k_func(rho, mu2, mu1)?) + 2.0 * (1.0 - alpha) * g_func(k_func(rho, mu2, mu2)?);
    Ok([first, second])
}

/// Maximum of F_α over [0,1]², comparing (½,½) against a boundary scan.
pub fn bipartite_max(rho: Correlation, alpha: f64) -> LandscapeReport {
    let centre_value = f_alpha_bipartite(rho, alpha, 0.5, 0.5);
    let mesh = grid(FACE_EDGE_MESH);
    let edges: Vec<(Vec<f64>, f64)> = [0.0, 1.0]
        .iter()
        .flat_map(|&e| {
            let mesh = &mesh;
            mesh.iter().flat_map(move |&m| [vec![e, m], vec![m, e]])
        })
        .map(|p| {
            let v = f_alpha_bipartite(rho, alpha, p[0], p[1]);
            (p, v)
        })
        .collect();
    let mut best = (vec![f64::INFINITY; 2], f64::NEG_INFINITY);
    for c in edges {
        best = better(best, c);
    }
    let residual = grad_f_alpha(rho, alpha, 0.5, 0.5)
        .map(|g| g.iter().map(|x| x * x).sum::<f64>().sqrt())
        .unwrap_or(f64::NAN);
    if centre_value >= best.1 {
        LandscapeReport {
            maximizer: vec![0.5, 0.5],
            value: centre_value,
            location_class: LocationClass::Interior,
            residual,
        }
    } else {
        LandscapeReport { maximizer: best.0, value: best.1, location_class: LocationClass::Boundary, residual: 0.0 }
    }
}

/// (|A|, B) with A = √(1−ρ²)/ρ and B = √((1−ρ)/(1+ρ)).
pub fn z_ratio_coefficients(rho: f64) -> (f64, f64) {
    let a = ((1.0 - rho) * (1.0 + rho)).sqrt() / rho;
    let b = ((1.0 - rho) / (1.0 + rho)).sqrt();
    (a.abs(), b)
}

/// h(x) = G(x)/G′(x) and its second derivative h + x + x²h.
pub fn h_second_derivative(x: f64) -> f64 {
    let h = g_func(x) / (2.0 * std_normal_pdf(x));
    h + x + x * x * h
}

/// Checks that Z(t) = G(|A|t)/G(Bt) increases strictly on an n-point grid of
/// (0, t_max], and that h″ > 0 on the same number of points of (0, t_max].
pub fn z_ratio_check(rho: f64, t_max: f64, n: usize) -> bool {
    if !(rho > -1.0 && rho < 0.0) || t_max <= 0.0 || n < 2 {
        return false;
    }
    let (a, b) = z_ratio_coefficients(rho);
    let z = |t: f64| g_func(a * t) / g_func(b * t);
    let mut prev = f64::NEG_INFINITY;
    for k in 1..=n {
        let t = t_max * k as f64 / n as f64;
        let v = z(t);
        if !(v > prev) {
            return false;
        }
        prev = v;
    }
    (1..=n).all(|k| h_second_derivative(t_max * k as f64 / n as f64) > 0.0)
}

/// Maximum of F_cut / 3 over a uniform grid with `per_axis` points per axis.
pub fn tripartite_grid_max(rho: Correlation, per_axis: usize) -> (Vec<f64>, f64) {
    let n = per_axis.max(2) - 1;
    let pts: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
    // Cut values on the grid pairs are reused across the cube.
    let table: Vec<f64> = pts
        .par_iter()
        .flat_map_iter(|&a| pts.iter().map(move |&b| gaussian_cut(rho, a, b)).collect::<Vec<_>>())
        .collect();
    let m = pts.len();
    let mut best = (vec![f64::INFINITY; 3], f64::NEG_INFINITY);
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                let v = (table[i * m + j] + table[i * m + k] + table[j * m + k]) / 3.0;
                if v > best.1 {
                    best = (vec![pts[i], pts[j], pts[k]], v);
                }
            }
        }
    }
    best
}

/// Σ co_cut over the three pairs; the potential whose gradient is [`grad_f_tripartite`].
pub fn co_cut_sum(rho: Correlation, p: &TripartitePoint) -> f64 {
    let [a, b, c] = p.mu;
    co_cut(rho, a, b) + co_cut(rho, a, c) + co_cut(rho, b, c)
}
