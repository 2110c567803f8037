//! Small dictatorship-test gadgets with exact weights, plus enumeration tools.
//!
//! Vertices are ordered part-major, then by string in lexicographic order.
//! Pair weights are stored densely as a packed upper triangle including the
//! diagonal, since correlated pairs may coincide (x = y).

mod analysis;
mod distribution;

pub use analysis::{
    brute_force_max_cut, cut_value, influence, influence_with_marginal, noise_operator, quasirandom_max_cut,
    BRUTE_FORCE_MAX_VERTICES, QUASIRANDOM_MAX_VERTICES,
};
pub use distribution::{correlation_of, make_mu2_alpha, make_rho_correlated, tensor_distribution, PairDistribution};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::Correlation;
use crate::sdp::{Edge, WeightedGraph};

pub const NOISY_CUBE_MAX_R: usize = 12;
pub const TRIPARTITE_MAX_R: usize = 8;
pub const KNOWN_ISET_MAX_R: usize = 8;
pub const HIDDEN_ISET_MAX_R: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GadgetGraph {
    pub parts: usize,
    pub r: usize,
    pub alphabet: usize,
    /// Marginal law of a single symbol, used for influences.
    pub symbol_marginal: Vec<f64>,
    packed: Vec<f64>,
}

/// Vertex → side; `true` means the vertex is in S.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutAssignment {
    pub member: Vec<bool>,
}

/// One mixture component: with probability `mass`, draw a pair from the
/// r-fold power of the symbol law with endpoints in parts (`from`, `to`).
struct Component {
    from: usize,
    to: usize,
    mass: f64,
}

/// Base-`alphabet` digits of `code`, most significant first.
fn string_digits(mut code: usize, alphabet: usize, r: usize) -> Vec<usize> {
    let mut digits = vec![0; r];
    for k in (0..r).rev() {
        digits[k] = code % alphabet;
        code /= alphabet;
    }
    digits
}

fn check_budget(what: &'static str, r: usize, limit: usize) -> Result<()> {
    if r > limit {
        Err(Error::BudgetExceeded { what, size: r, limit })
    } else {
        Ok(())
    }
}

impl GadgetGraph {
    fn build(parts: usize, r: usize, law: &PairDistribution, components: &[Component]) -> Self {
        let alphabet = law.domain_size;
        let symbol_marginal = law.left_marginal();
        let per_part = alphabet.pow(r as u32);
        let n = parts * per_part;
        let mut g = GadgetGraph { parts, r, alphabet, symbol_marginal, packed: vec![0.0; n * (n + 1) / 2] };
        let digits: Vec<Vec<usize>> = (0..per_part).map(|x| string_digits(x, alphabet, r)).collect();
        let pair_law = |x: usize, y: usize| -> f64 { digits[x].iter().zip(&digits[y]).map(|(&a, &b)| law.get(a, b)).product() };
        for c in components {
            for x in 0..per_part {
                for y in 0..per_part {
                    let w = c.mass * pair_law(x, y);
                    if w != 0.0 {
                        let u = c.from * per_part + x;
                        let v = c.to * per_part + y;
                        let idx = g.packed_index(u.min(v), u.max(v));
                        g.packed[idx] += w;
                    }
                }
            }
        }
        g
    }

    pub fn vertex_count(&self) -> usize {
        self.parts * self.per_part()
    }

    pub fn per_part(&self) -> usize {
        self.alphabet.pow(self.r as u32)
    }

    fn packed_index(&self, i: usize, j: usize) -> usize {
        let n = self.vertex_count();
        i * (2 * n - i + 1) / 2 + (j - i)
    }

    /// Weight of the unordered pair {i, j}; i = j gives the loop mass.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.packed[self.packed_index(i.min(j), i.max(j))]
    }

    pub fn total_weight(&self) -> f64 {
        self.packed.iter().sum()
    }

    /// (part, string) label of a vertex.
    pub fn vertex(&self, v: usize) -> (usize, Vec<usize>) {
        let per = self.per_part();
        (v / per, string_digits(v % per, self.alphabet, self.r))
    }

    pub fn vertices(&self) -> Vec<(usize, Vec<usize>)> {
        (0..self.vertex_count()).map(|v| self.vertex(v)).collect()
    }

    /// Vertices of one part.
    pub fn part(&self, index: usize) -> Vec<usize> {
        let per = self.per_part();
        (index * per..(index + 1) * per).collect()
    }

    /// Cut given by a rule on (part, string).
    pub fn assignment_from<F: Fn(usize, &[usize]) -> bool>(&self, rule: F) -> CutAssignment {
        CutAssignment {
            member: (0..self.vertex_count())
                .map(|v| {
                    let (p, s) = self.vertex(v);
                    rule(p, &s)
                })
                .collect(),
        }
    }

    /// Dictator on `coordinate` for binary alphabets: S = {x : x_coordinate = 1}.
    pub fn dictator(&self, coordinate: usize) -> CutAssignment {
        self.assignment_from(|_, s| s[coordinate] == 1)
    }

    /// (is independent, weight of pairs touching the set). Loops count as inside.
    pub fn independent_set_check(&self, set: &[usize]) -> (bool, f64) {
        let n = self.vertex_count();
        let mut member = vec![false; n];
        for &v in set.iter().filter(|&&v| v < n) {
            member[v] = true;
        }
        let mut independent = true;
        let mut incident = 0.0;
        for i in 0..n {
            for j in i..n {
                let w = self.weight(i, j);
                if w == 0.0 {
                    continue;
                }
                match (member[i], member[j]) {
                    (true, true) => {
                        independent = false;
                        incident += w;
                    }
                    (true, false) | (false, true) => incident += w,
                    _ => {}
                }
            }
        }
        (independent, incident)
    }

    /// Weight of unordered pairs with one end in `a` and the other in `b`.
    pub fn weight_between(&self, a: &[usize], b: &[usize]) -> f64 {
        let n = self.vertex_count();
        let (mut in_a, mut in_b) = (vec![false; n], vec![false; n]);
        a.iter().for_each(|&v| in_a[v] = true);
        b.iter().for_each(|&v| in_b[v] = true);
        let mut total = 0.0;
        for i in 0..n {
            for j in i..n {
                if (in_a[i] && in_b[j]) || (in_a[j] && in_b[i]) {
                    total += self.weight(i, j);
                }
            }
        }
        total
    }

    /// Loop-free export; the loader renormalises the remaining weights.
    pub fn to_weighted_graph(&self) -> Result<WeightedGraph> {
        let n = self.vertex_count();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let w = self.weight(i, j);
                if w > 0.0 {
                    edges.push(Edge { i, j, w });
                }
            }
        }
        WeightedGraph::new(n, edges)
    }
}

/// Single-part cube with pairs from the r-fold ρ-correlated law.
pub fn build_noisy_cube(rho: Correlation, r: usize) -> Result<GadgetGraph> {
    check_budget("noisy cube dimension", r, NOISY_CUBE_MAX_R)?;
    let law = make_rho_correlated(rho);
    Ok(GadgetGraph::build(1, r, &law, &[Component { from: 0, to: 0, mass: 1.0 }]))
}

/// Three cube copies; a uniform ordered pair of distinct parts, then a ρ-correlated pair across them.
pub fn build_tripartite_cube(rho: Correlation, r: usize) -> Result<GadgetGraph> {
    check_budget("tripartite cube dimension", r, TRIPARTITE_MAX_R)?;
    let law = make_rho_correlated(rho);
    let comps: Vec<Component> = (0..3)
        .flat_map(|i| (0..3).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(from, to)| Component { from, to, mass: 1.0 / 6.0 })
        .collect();
    Ok(GadgetGraph::build(3, r, &law, &comps))
}

/// Parts V₁, V₂: mass α on V₁ × V₂ and 1 − α on V₂ × V₂, both ρ-correlated.
pub fn build_known_iset_gadget(rho: Correlation, alpha: f64, r: usize) -> Result<GadgetGraph> {
    check_budget("known independent set gadget dimension", r, KNOWN_ISET_MAX_R)?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Domain(format!("alpha {alpha} outside [0, 1]")));
    }
    let law = make_rho_correlated(rho);
    let comps = [
        Component { from: 0, to: 1, mass: alpha },
        Component { from: 1, to: 1, mass: 1.0 - alpha },
    ];
    Ok(GadgetGraph::build(2, r, &law, &comps))
}

/// Single part over (Ω²)^r with the pair law (μ₁ ⊗ μ_{2,α})^r.
///
/// A symbol s encodes (x, y) = (s / 2, s % 2).
pub fn build_hidden_iset_gadget(rho: Correlation, alpha: f64, r: usize) -> Result<GadgetGraph> {
    check_budget("hidden independent set gadget dimension", r, HIDDEN_ISET_MAX_R)?;
    let law = tensor_distribution(&make_rho_correlated(rho), &make_mu2_alpha(alpha)?);
    Ok(GadgetGraph::build(1, r, &law, &[Component { from: 0, to: 0, mass: 1.0 }]))
}

/// Vertices of the hidden gadget whose y-part at `coordinate` equals 1.
pub fn hidden_y_dictator_set(g: &GadgetGraph, coordinate: usize) -> Vec<usize> {
    (0..g.vertex_count()).filter(|&v| g.vertex(v).1[coordinate] % 2 == 1).collect()
}

/// x-dictator of the hidden gadget: S = {x-part at `coordinate` = 1}.
pub fn hidden_x_dictator(g: &GadgetGraph, coordinate: usize) -> CutAssignment {
    g.assignment_from(|_, s| s[coordinate] / 2 == 1)
}
