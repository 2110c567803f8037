//! The independence-constrained Max-Cut SDP.
//!
//! Vectors are stored with v₀ fixed to the first basis direction, so the
//! bias of vertex i is simply the first coordinate of its vector.

mod instances;
mod reference;
mod solver;

pub use instances::{greedy_independent_set, planted_instance, random_feasible_solution, random_graph};
pub use reference::{dense_reference_solve, DenseReference};
pub use solver::{solve_sdp, SolverConfig};

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Read;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub w: f64,
}

/// Undirected weighted graph with weights normalised to sum 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedGraph {
    pub n: usize,
    /// Merged edges with i < j, sorted by (i, j).
    pub edges: Vec<Edge>,
    /// Total input weight before normalisation.
    pub scale: f64,
    /// Independent set declared by the input, if any.
    pub planted: Option<Vec<usize>>,
}

impl WeightedGraph {
    /// Validates, merges duplicates and normalises.
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        let raw: Vec<(usize, Edge)> = edges.into_iter().map(|e| (0, e)).collect();
        Self::from_lines(n, raw)
    }

    /// A graph with no edges (used for vacuous reports).
    pub fn empty(n: usize) -> Self {
        Self { n, edges: Vec::new(), scale: 0.0, planted: None }
    }

    fn from_lines(n: usize, raw: Vec<(usize, Edge)>) -> Result<Self> {
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (line, e) in raw {
            if !(e.w.is_finite()) {
                return Err(Error::Parse { line, msg: format!("weight {} is not finite", e.w) });
            }
            if e.w < 0.0 {
                return Err(Error::NegativeWeight { line });
            }
            if e.i == e.j {
                return Err(Error::SelfLoop { line, vertex: e.i });
            }
            if e.i >= n || e.j >= n {
                return Err(Error::Parse { line, msg: format!("vertex out of range (n = {n})") });
            }
            *merged.entry((e.i.min(e.j), e.i.max(e.j))).or_insert(0.0) += e.w;
        }
        let scale: f64 = merged.values().sum();
        if !(scale > 0.0) {
            return Err(Error::Parse { line: 0, msg: "graph has no positive edge weight".into() });
        }
        let edges = merged
            .into_iter()
            .filter(|(_, w)| *w > 0.0)
            .map(|((i, j), w)| Edge { i, j, w: w / scale })
            .collect();
        Ok(Self { n, edges, scale, planted: None })
    }

    pub fn with_planted(mut self, planted: Vec<usize>) -> Self {
        self.planted = Some(planted);
        self
    }

    /// Weighted degree of every vertex.
    pub fn degrees(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for e in &self.edges {
            d[e.i] += e.w;
            d[e.j] += e.w;
        }
        d
    }

    /// (is independent, weight of edges touching the set).
    pub fn independent_set_check(&self, set: &[usize]) -> (bool, f64) {
        let mut member = vec![false; self.n];
        for &v in set {
            if v < self.n {
                member[v] = true;
            }
        }
        let mut independent = true;
        let mut incident = 0.0;
        for e in &self.edges {
            match (member[e.i], member[e.j]) {
                (true, true) => {
                    independent = false;
                    incident += e.w;
                }
                (true, false) | (false, true) => incident += e.w,
                _ => {}
            }
        }
        (independent, incident)
    }

    /// Text form accepted by [`load_graph`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(p) = &self.planted {
            let list: Vec<String> = p.iter().map(|v| v.to_string()).collect();
            out.push_str(&format!("# planted: {}\n", list.join(" ")));
        }
        out.push_str(&format!("{} {}\n", self.n, self.edges.len()));
        for e in &self.edges {
            out.push_str(&format!("{} {} {:e}\n", e.i, e.j, e.w));
        }
        out
    }
}

/// Parses the text graph format: header "n m", then m lines "i j w".
///
/// Lines starting with '#' are comments; "# planted: v1 v2 ..." declares a
/// planted independent set. Duplicate edges are merged by summing weights.
pub fn load_graph<R: Read>(mut source: R) -> Result<WeightedGraph> {
    let mut text = String::new();
    source
        .read_to_string(&mut text)
        .map_err(|e| Error::Parse { line: 0, msg: e.to_string() })?;
    let mut header: Option<(usize, usize)> = None;
    let mut raw = Vec::new();
    let mut planted = None;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(list) = comment.trim().strip_prefix("planted:") {
                let parsed: std::result::Result<Vec<usize>, _> =
                    list.split_whitespace().map(|s| s.parse::<usize>()).collect();
                planted = Some(parsed.map_err(|e| Error::Parse { line: line_no, msg: e.to_string() })?);
            }
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        match header {
            None => {
                if fields.len() != 2 {
                    return Err(Error::Parse { line: line_no, msg: "expected header \"n m\"".into() });
                }
                let n = parse_field::<usize>(fields[0], line_no)?;
                let m = parse_field::<usize>(fields[1], line_no)?;
                header = Some((n, m));
            }
            Some(_) => {
                if fields.len() != 3 {
                    return Err(Error::Parse { line: line_no, msg: "expected \"i j w\"".into() });
                }
                let i = parse_field::<usize>(fields[0], line_no)?;
                let j = parse_field::<usize>(fields[1], line_no)?;
                let w = parse_field::<f64>(fields[2], line_no)?;
                raw.push((line_no, Edge { i, j, w }));
            }
        }
    }
    let (n, m) = header.ok_or(Error::Parse { line: 0, msg: "missing header".into() })?;
    if raw.len() != m {
        return Err(Error::Parse {
            line: 0,
            msg: format!("header declares {m} edges, found {}", raw.len()),
        });
    }
    let mut g = WeightedGraph::from_lines(n, raw)?;
    if let Some(p) = planted {
        if let Some(&bad) = p.iter().find(|&&v| v >= n) {
            return Err(Error::Parse { line: 0, msg: format!("planted vertex {bad} out of range") });
        }
        g.planted = Some(p);
    }
    Ok(g)
}

fn parse_field<T: std::str::FromStr>(s: &str, line: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.parse::<T>().map_err(|e| Error::Parse { line, msg: format!("{s:?}: {e}") })
}

/// Vectors v₀..v_n (v₀ = e₁) with cached biases b_i = v_i·v₀.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdpSolution {
    pub dim: usize,
    pub vectors: Vec<Vec<f64>>,
    /// One bias per graph vertex (vector i+1).
    pub biases: Vec<f64>,
}

impl SdpSolution {
    /// Builds a solution from vertex vectors; v₀ is prepended.
    pub fn from_vertex_vectors(dim: usize, rows: Vec<Vec<f64>>) -> Self {
        let mut v0 = vec![0.0; dim];
        v0[0] = 1.0;
        let biases = rows.iter().map(|r| r[0]).collect();
        let mut vectors = Vec::with_capacity(rows.len() + 1);
        vectors.push(v0);
        vectors.extend(rows);
        Self { dim, vectors, biases }
    }

    /// All vertices at v₀.
    pub fn trivial(n: usize, dim: usize) -> Self {
        let mut e1 = vec![0.0; dim.max(1)];
        e1[0] = 1.0;
        Self::from_vertex_vectors(dim.max(1), vec![e1; n])
    }

    /// v_i = −v₀ on `set`, v₀ elsewhere.
    pub fn integral(n: usize, set: &[usize], dim: usize) -> Self {
        let mut s = Self::trivial(n, dim);
        for &v in set {
            s.vectors[v + 1][0] = -1.0;
            s.biases[v] = -1.0;
        }
        s
    }

    pub fn n(&self) -> usize {
        self.biases.len()
    }

    fn check(&self, g: &WeightedGraph) -> Result<()> {
        if self.vectors.len() != g.n + 1 {
            return Err(Error::DimensionMismatch { expected: g.n + 1, found: self.vectors.len() });
        }
        if let Some(bad) = self.vectors.iter().find(|v| v.len() != self.dim) {
            return Err(Error::DimensionMismatch { expected: self.dim, found: bad.len() });
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Self = serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })?;
        if s.vectors.len() != s.biases.len() + 1 || s.vectors.iter().any(|v| v.len() != s.dim) {
            return Err(Error::Parse { line: 0, msg: "inconsistent solution dimensions".into() });
        }
        Ok(s)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Σ_e w_e (1 − v_i·v_j)/2.
pub fn sdp_objective(g: &WeightedGraph, s: &SdpSolution) -> Result<f64> {
    s.check(g)?;
    Ok(g.edges
        .iter()
        .map(|e| e.w * 0.5 * (1.0 - dot(&s.vectors[e.i + 1], &s.vectors[e.j + 1])))
        .sum())
}

/// Σ_e w_e (b_i + b_j)/2; equals 1 − objective on feasible solutions.
pub fn mean_bias(g: &WeightedGraph, s: &SdpSolution) -> f64 {
    g.edges
        .iter()
        .map(|e| e.w * 0.5 * (s.biases[e.i] + s.biases[e.j]))
        .sum()
}

/// Maximum violations of the SDP constraints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    /// max |‖v_i‖² − 1| over all vectors including v₀.
    pub unit_norm: f64,
    /// max |(v₀ − v_i)·(v₀ − v_j)| over edges.
    pub orthogonality: f64,
    /// max |v_i·v_j − (−1 + b_i + b_j)| over edges.
    pub bias_identity: f64,
    /// max over edges of max(0, −(b_i + b_j)).
    pub bias_sum: f64,
}

impl FeasibilityReport {
    pub fn max(&self) -> f64 {
        self.unit_norm.max(self.orthogonality).max(self.bias_identity).max(self.bias_sum)
    }
}

pub fn feasibility_report(g: &WeightedGraph, s: &SdpSolution) -> FeasibilityReport {
    let v0 = &s.vectors[0];
    let unit_norm = s.vectors.iter().map(|v| (dot(v, v) - 1.0).abs()).fold(0.0, f64::max);
    let mut orthogonality: f64 = 0.0;
    let mut bias_identity: f64 = 0.0;
    let mut bias_sum: f64 = 0.0;
    for e in &g.edges {
        let (vi, vj) = (&s.vectors[e.i + 1], &s.vectors[e.j + 1]);
        let bi = dot(vi, v0);
        let bj = dot(vj, v0);
        let ortho: f64 = v0
            .iter()
            .zip(vi.iter().zip(vj))
            .map(|(a, (x, y))| (a - x) * (a - y))
            .sum();
        orthogonality = orthogonality.max(ortho.abs());
        bias_identity = bias_identity.max((dot(vi, vj) - (-1.0 + bi + bj)).abs());
        bias_sum = bias_sum.max(-(bi + bj));
    }
    FeasibilityReport { unit_norm, orthogonality, bias_identity, bias_sum }
}

/// Gram blend λ·Gram(s) + (1−λ)·Gram(all v₀) hitting `target_obj` from above.
pub fn blend_solution(s: &SdpSolution, g: &WeightedGraph, target_obj: f64) -> Result<SdpSolution> {
    let current = sdp_objective(g, s)?;
    if target_obj > current {
        return Err(Error::TargetAbove { target: target_obj, current });
    }
    if target_obj <= 0.0 {
        return Ok(SdpSolution::trivial(s.n(), s.dim));
    }
    if target_obj == current {
        return Ok(s.clone());
    }
    let mut lambda = target_obj / current;
    let mut out = blend_with(s, lambda);
    for _ in 0..64 {
        if sdp_objective(g, &out)? >= target_obj || lambda >= 1.0 {
            break;
        }
        lambda = (lambda + 4.0 * f64::EPSILON * lambda).min(1.0);
        out = blend_with(s, lambda);
    }
    Ok(out)
}

// Each vector becomes (√λ v, √(1−λ)) and is then rotated so that v₀ stays e₁.
fn blend_with(s: &SdpSolution, lambda: f64) -> SdpSolution {
    let c = lambda.sqrt();
    let sn = (1.0 - lambda).sqrt();
    let dim = s.dim + 1;
    let rows = s.vectors[1..]
        .iter()
        .map(|v| {
            let mut w = vec![0.0; dim];
            let b = v[0];
            w[0] = lambda * b + (1.0 - lambda);
            for k in 1..s.dim {
                w[k] = c * v[k];
            }
            w[s.dim] = c * sn * (1.0 - b);
            w
        })
        .collect();
    SdpSolution::from_vertex_vectors(dim, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn triangle() -> WeightedGraph {
        load_graph("3 3\n0 1 1\n1 2 1\n0 2 1\n".as_bytes()).unwrap()
    }

    #[test]
    fn parse_single_edge() {
        let g = load_graph("2 1\n0 1 1.0".as_bytes()).unwrap();
        assert_eq!(g.n, 2);
        assert_eq!(g.edges, vec![Edge { i: 0, j: 1, w: 1.0 }]);
    }

    #[test]
    fn parse_merges_duplicates_and_normalises() {
        let g = load_graph("# comment\n3 3\n0 1 2\n1 0 2\n1 2 4\n".as_bytes()).unwrap();
        assert_eq!(g.edges.len(), 2);
        assert_eq!(g.edges[0].w, 0.5);
        assert_eq!(g.edges[1].w, 0.5);
        assert_eq!(g.scale, 8.0);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(load_graph("2 1\n0 0 1.0".as_bytes()), Err(Error::SelfLoop { line: 2, vertex: 0 })));
        assert!(matches!(load_graph("2 1\n0 1 -1.0".as_bytes()), Err(Error::NegativeWeight { line: 2 })));
        assert!(matches!(load_graph("2 1\n0 x 1.0".as_bytes()), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(load_graph("".as_bytes()), Err(Error::Parse { .. })));
        assert!(matches!(load_graph("2 0\n".as_bytes()), Err(Error::Parse { .. })));
        assert!(matches!(load_graph("2 2\n0 1 1\n".as_bytes()), Err(Error::Parse { .. })));
    }

    #[test]
    fn parse_planted_and_roundtrip() {
        let g = load_graph("# planted: 0 2\n3 2\n0 1 1\n1 2 1\n".as_bytes()).unwrap();
        assert_eq!(g.planted, Some(vec![0, 2]));
        let again = load_graph(g.to_text().as_bytes()).unwrap();
        assert_eq!(again.edges, g.edges);
        assert_eq!(again.planted, g.planted);
        assert_eq!(g.independent_set_check(&[0, 2]), (true, 1.0));
    }

    #[test]
    fn objective_examples() {
        let g = triangle();
        let trivial = SdpSolution::trivial(3, 3);
        assert_eq!(sdp_objective(&g, &trivial).unwrap(), 0.0);
        assert_eq!(feasibility_report(&g, &trivial).max(), 0.0);
        let edge = load_graph("2 1\n0 1 1".as_bytes()).unwrap();
        let anti = SdpSolution::integral(2, &[1], 2);
        assert_eq!(sdp_objective(&edge, &anti).unwrap(), 1.0);
        let bad = SdpSolution::trivial(2, 2);
        assert!(matches!(sdp_objective(&g, &bad), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn integral_solution_is_exactly_feasible() {
        let g = triangle();
        let s = SdpSolution::integral(3, &[1], 3);
        let rep = feasibility_report(&g, &s);
        assert_eq!(rep.max(), 0.0);
        assert!((sdp_objective(&g, &s).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn perturbation_shows_in_report() {
        let g = triangle();
        let mut s = SdpSolution::integral(3, &[1], 3);
        s.vectors[2][1] += 1e-3;
        let rep = feasibility_report(&g, &s);
        assert!(rep.unit_norm > 5e-7 && rep.unit_norm < 2e-6);
        s.vectors[1][0] -= 1e-3;
        s.biases[0] -= 1e-3;
        let rep = feasibility_report(&g, &s);
        assert!(rep.orthogonality > 5e-4 && rep.orthogonality < 3e-3);
        let empty = WeightedGraph::empty(3);
        assert_eq!(feasibility_report(&empty, &s).orthogonality, 0.0);
    }

    #[test]
    fn blend_endpoints() {
        let g = triangle();
        let s = SdpSolution::integral(3, &[1], 3);
        let zero = blend_solution(&s, &g, 0.0).unwrap();
        assert_eq!(sdp_objective(&g, &zero).unwrap(), 0.0);
        let same = blend_solution(&s, &g, sdp_objective(&g, &s).unwrap()).unwrap();
        assert_eq!(same, s);
        assert!(matches!(blend_solution(&s, &g, 0.9), Err(Error::TargetAbove { .. })));
    }

    #[test]
    fn blend_hits_target_window() {
        let g = triangle();
        let s = SdpSolution::integral(3, &[1], 3);
        let target = 0.5 + 1e-13;
        let b = blend_solution(&s, &g, target).unwrap();
        let obj = sdp_objective(&g, &b).unwrap();
        assert!(obj >= target && obj <= target + 1e-9, "{obj}");
        assert!(feasibility_report(&g, &b).max() < 1e-15);
    }

    proptest! {
        #[test]
        fn gram_blend_of_feasible_pairs_is_feasible(seed in 0u64..500, lambda in 0.0f64..1.0) {
            let g = random_graph(12, 0.3, seed);
            let a = random_feasible_solution(&g, seed, 3);
            let b = random_feasible_solution(&g, seed + 1000, 3);
            // Concatenation realises the Gram blend λ·G_a + (1−λ)·G_b.
            let (c, d) = (lambda.sqrt(), (1.0 - lambda).sqrt());
            let rows: Vec<Vec<f64>> = (0..=g.n)
                .map(|i| {
                    let mut r: Vec<f64> = a.vectors[i].iter().map(|x| c * x).collect();
                    r.extend(b.vectors[i].iter().map(|x| d * x));
                    r
                })
                .collect();
            let mut v0 = rows[0].clone();
            // Rotate so v0 = e1: apply a Householder reflection.
            let mut u = v0.clone();
            u[0] -= 1.0;
            let un: f64 = u.iter().map(|x| x * x).sum();
            let reflect = |x: &Vec<f64>| -> Vec<f64> {
                if un < 1e-30 { return x.clone(); }
                let k = 2.0 * dot(&u, x) / un;
                x.iter().zip(&u).map(|(a, b)| a - k * b).collect()
            };
            v0 = reflect(&v0);
            prop_assert!((v0[0] - 1.0).abs() < 1e-12);
            let vertex_rows: Vec<Vec<f64>> = rows[1..].iter().map(reflect).collect();
            let blended = SdpSolution::from_vertex_vectors(v0.len(), vertex_rows);
            let rep = feasibility_report(&g, &blended);
            prop_assert!(rep.orthogonality < 1e-12 && rep.unit_norm < 1e-12);
        }

        #[test]
        fn objective_matches_bias_identity(seed in 0u64..500) {
            let g = random_graph(15, 0.25, seed);
            let s = random_feasible_solution(&g, seed, 4);
            for e in &g.edges {
                let vij = dot(&s.vectors[e.i + 1], &s.vectors[e.j + 1]);
                prop_assert!(((1.0 - vij) / 2.0 - (1.0 - (s.biases[e.i] + s.biases[e.j]) / 2.0)).abs() < 1e-12);
            }
            let obj = sdp_objective(&g, &s).unwrap();
            prop_assert!((obj - (1.0 - mean_bias(&g, &s))).abs() < 1e-12);
        }
    }
}
