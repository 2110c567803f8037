//! Joint distributions on Ω × Ω.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::Correlation;

/// Row-major probability table; entry (x, y) sits at `x * domain_size + y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDistribution {
    pub domain_size: usize,
    pub table: Vec<f64>,
}

impl PairDistribution {
    pub fn new(domain_size: usize, table: Vec<f64>) -> Result<Self> {
        if table.len() != domain_size * domain_size {
            return Err(Error::DimensionMismatch { expected: domain_size * domain_size, found: table.len() });
        }
        if table.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::Domain("probabilities must be nonnegative".into()));
        }
        let total: f64 = table.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("table sums to {total}")));
        }
        Ok(Self { domain_size, table })
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.table[x * self.domain_size + y]
    }

    /// Marginal of the first coordinate.
    pub fn left_marginal(&self) -> Vec<f64> {
        let d = self.domain_size;
        (0..d).map(|x| (0..d).map(|y| self.get(x, y)).sum()).collect()
    }

    pub fn right_marginal(&self) -> Vec<f64> {
        let d = self.domain_size;
        (0..d).map(|y| (0..d).map(|x| self.get(x, y)).sum()).collect()
    }

    /// Pr[x ≠ y].
    pub fn disagreement(&self) -> f64 {
        let d = self.domain_size;
        (0..d).flat_map(|x| (0..d).map(move |y| (x, y))).filter(|(x, y)| x != y).map(|(x, y)| self.get(x, y)).sum()
    }
}

/// Uniform bits with Pr[x ≠ y] = (1 − ρ)/2.
pub fn make_rho_correlated(rho: Correlation) -> PairDistribution {
    let r = rho.value();
    let same = (1.0 + r) / 4.0;
    let diff = (1.0 - r) / 4.0;
    PairDistribution { domain_size: 2, table: vec![same, diff, diff, same] }
}

/// μ_{2,α}: (0,0) ↦ 1−α, (0,1) and (1,0) ↦ α/2, (1,1) ↦ 0.
pub fn make_mu2_alpha(alpha: f64) -> Result<PairDistribution> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Domain(format!("alpha {alpha} outside [0, 1]")));
    }
    Ok(PairDistribution { domain_size: 2, table: vec![1.0 - alpha, alpha / 2.0, alpha / 2.0, 0.0] })
}

/// Product law on (Ω_a × Ω_b)²; the pair symbol (u, v) is encoded as u·|Ω_b| + v.
pub fn tensor_distribution(a: &PairDistribution, b: &PairDistribution) -> PairDistribution {
    let (da, db) = (a.domain_size, b.domain_size);
    let d = da * db;
    let mut table = vec![0.0; d * d];
    for x1 in 0..da {
        for x2 in 0..db {
            for y1 in 0..da {
                for y2 in 0..db {
                    table[(x1 * db + x2) * d + (y1 * db + y2)] = a.get(x1, y1) * b.get(x2, y2);
                }
            }
        }
    }
    PairDistribution { domain_size: d, table }
}

/// Second singular value of μ(x, y)/√(μ₁(x) μ₂(y)).
pub fn correlation_of(d: &PairDistribution) -> Result<Correlation> {
    let left = d.left_marginal();
    let right = d.right_marginal();
    let n = d.domain_size;
    for (index, &m) in left.iter().chain(right.iter()).enumerate() {
        if m <= 0.0 {
            return Err(Error::DegenerateMarginal { index: index % n });
        }
    }
    if n < 2 {
        return Correlation::new(0.0);
    }
    let m = DMatrix::from_fn(n, n, |x, y| d.get(x, y) / (left[x] * right[y]).sqrt());
    let mut sv: Vec<f64> = m.singular_values().iter().cloned().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(Correlation::clamped(sv[1]))
}
