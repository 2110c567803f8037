//! Random graphs, planted instances and exactly feasible SDP points.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Edge, SdpSolution, WeightedGraph};

/// G(n, p) with unit weights; an edge (0, 1) is added if none was drawn.
pub fn random_graph(n: usize, p: f64, seed: u64) -> WeightedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < p {
                edges.push(Edge { i, j, w: 1.0 });
            }
        }
    }
    if edges.is_empty() && n >= 2 {
        edges.push(Edge { i: 0, j: 1, w: 1.0 });
    }
    WeightedGraph::new(n, edges).expect("generated edges are valid")
}

/// Graph with a planted independent set on the first `iset_size` vertices.
///
/// `cross_edges` random edges join the set to the rest and `rest_edges`
/// random edges lie inside the rest, so the set's incident weight is
/// cross / (cross + rest) exactly.
pub fn planted_instance(
    n: usize,
    iset_size: usize,
    cross_edges: usize,
    rest_edges: usize,
    seed: u64,
) -> WeightedGraph {
    assert!(iset_size < n && n - iset_size >= 2, "need at least two vertices outside the set");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity(cross_edges + rest_edges);
    for _ in 0..cross_edges {
        let i = rng.random_range(0..iset_size);
        let j = rng.random_range(iset_size..n);
        edges.push(Edge { i, j, w: 1.0 });
    }
    for _ in 0..rest_edges {
        let i = rng.random_range(iset_size..n);
        let mut j = rng.random_range(iset_size..n);
        while j == i {
            j = rng.random_range(iset_size..n);
        }
        edges.push(Edge { i, j, w: 1.0 });
    }
    WeightedGraph::new(n, edges)
        .expect("generated edges are valid")
        .with_planted((0..iset_size).collect())
}

/// Maximal independent set chosen greedily by weighted degree.
pub fn greedy_independent_set(g: &WeightedGraph) -> Vec<usize> {
    let deg = g.degrees();
    let mut order: Vec<usize> = (0..g.n).collect();
    order.sort_by(|&a, &b| deg[b].total_cmp(&deg[a]).then(a.cmp(&b)));
    let mut adj = vec![Vec::new(); g.n];
    for e in &g.edges {
        adj[e.i].push(e.j);
        adj[e.j].push(e.i);
    }
    let mut blocked = vec![false; g.n];
    let mut chosen = Vec::new();
    for v in order {
        if !blocked[v] && deg[v] > 0.0 {
            chosen.push(v);
            blocked[v] = true;
            for &u in &adj[v] {
                blocked[u] = true;
            }
        }
    }
    chosen.sort_unstable();
    chosen
}

/// Exactly feasible SDP point with every bias in (−1, 1).
///
/// Built as a random convex combination of integral solutions, one per
/// colour class of `colorings` random greedy colourings. Every vertex lies
/// in one class per colouring, so no vector coincides with v₀.
pub fn random_feasible_solution(g: &WeightedGraph, seed: u64, colorings: usize) -> SdpSolution {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adj = vec![Vec::new(); g.n];
    for e in &g.edges {
        adj[e.i].push(e.j);
        adj[e.j].push(e.i);
    }
    let mut classes: Vec<Vec<bool>> = Vec::new();
    for _ in 0..colorings.max(1) {
        let mut order: Vec<usize> = (0..g.n).collect();
        order.shuffle(&mut rng);
        let mut color = vec![usize::MAX; g.n];
        let mut count = 0;
        for v in order {
            let mut c = 0;
            while adj[v].iter().any(|&u| color[u] == c) {
                c += 1;
            }
            color[v] = c;
            count = count.max(c + 1);
        }
        for c in 0..count {
            classes.push(color.iter().map(|&x| x == c).collect());
        }
    }
    let raw: Vec<f64> = classes.iter().map(|_| -rng.random::<f64>().max(1e-12).ln()).collect();
    let total: f64 = raw.iter().sum();
    let roots: Vec<f64> = raw.iter().map(|x| (x / total).sqrt()).collect();
    let dim = classes.len();
    let v0: Vec<f64> = roots.clone();
    let mut u = v0.clone();
    u[0] -= 1.0;
    let uu: f64 = u.iter().map(|x| x * x).sum();
    let reflect = |x: &[f64]| -> Vec<f64> {
        if uu < 1e-30 {
            return x.to_vec();
        }
        let k = 2.0 * u.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() / uu;
        x.iter().zip(&u).map(|(a, b)| a - k * b).collect()
    };
    let rows: Vec<Vec<f64>> = (0..g.n)
        .map(|i| {
            let v: Vec<f64> = classes
                .iter()
                .zip(&roots)
                .map(|(cls, r)| if cls[i] { -r } else { *r })
                .collect();
            reflect(&v)
        })
        .collect();
    SdpSolution::from_vertex_vectors(dim.max(1), rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::feasibility_report;

    #[test]
    fn planted_weight_is_exact() {
        let g = planted_instance(40, 20, 85, 15, 3);
        let set = g.planted.clone().unwrap();
        let (ind, w) = g.independent_set_check(&set);
        assert!(ind);
        assert!((w - 0.85).abs() < 1e-12);
    }

    #[test]
    fn greedy_set_is_independent() {
        let g = random_graph(30, 0.2, 4);
        let s = greedy_independent_set(&g);
        assert!(g.independent_set_check(&s).0);
        assert!(!s.is_empty());
    }

    #[test]
    fn random_feasible_points_are_feasible_and_generic() {
        for seed in 0..5 {
            let g = random_graph(25, 0.2, seed);
            let s = random_feasible_solution(&g, seed, 3);
            assert!(feasibility_report(&g, &s).max() < 1e-12);
            assert!(s.biases.iter().all(|b| b.abs() < 1.0 - 1e-9));
        }
    }
}
