//! Dense full-rank solver for tiny instances, used as a cross-check.
//!
//! ADMM on the Gram matrix: an affine projection enforcing the unit
//! diagonal and the edge constraints alternates with an eigenvalue
//! projection onto the PSD cone.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::WeightedGraph;
use crate::error::{Error, Result};

pub const DENSE_REFERENCE_MAX_VERTICES: usize = 8;

#[derive(Debug, Clone)]
pub struct DenseReference {
    pub objective: f64,
    pub gram: DMatrix<f64>,
    /// max |X − Z| between the affine and PSD iterates at exit.
    pub residual: f64,
    pub iterations: usize,
}

fn svec_index(size: usize, p: usize, q: usize) -> usize {
    let (p, q) = if p <= q { (p, q) } else { (q, p) };
    p * size - p * (p + 1) / 2 + q
}

fn to_svec(m: &DMatrix<f64>) -> DVector<f64> {
    let size = m.nrows();
    let mut v = DVector::zeros(size * (size + 1) / 2);
    for p in 0..size {
        for q in p..size {
            let scale = if p == q { 1.0 } else { std::f64::consts::SQRT_2 };
            v[svec_index(size, p, q)] = m[(p, q)] * scale;
        }
    }
    v
}

fn from_svec(v: &DVector<f64>, size: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(size, size);
    for p in 0..size {
        for q in p..size {
            let scale = if p == q { 1.0 } else { std::f64::consts::FRAC_1_SQRT_2 };
            let x = v[svec_index(size, p, q)] * scale;
            m[(p, q)] = x;
            m[(q, p)] = x;
        }
    }
    m
}

fn psd_projection(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let clipped = eig.eigenvalues.map(|x| x.max(0.0));
    &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose()
}

/// Solves the SDP over full Gram matrices; at most 8 graph vertices.
pub fn dense_reference_solve(g: &WeightedGraph, max_iters: usize) -> Result<DenseReference> {
    if g.n > DENSE_REFERENCE_MAX_VERTICES {
        return Err(Error::BudgetExceeded {
            what: "dense reference vertices",
            size: g.n,
            limit: DENSE_REFERENCE_MAX_VERTICES,
        });
    }
    let size = g.n + 1;
    let dim = size * (size + 1) / 2;
    let rows = size + g.edges.len();
    let mut a = DMatrix::zeros(rows, dim);
    let mut b = DVector::zeros(rows);
    for p in 0..size {
        a[(p, svec_index(size, p, p))] = 1.0;
        b[p] = 1.0;
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut cost = DVector::zeros(dim);
    for (k, e) in g.edges.iter().enumerate() {
        let (i, j) = (e.i + 1, e.j + 1);
        let row = size + k;
        a[(row, svec_index(size, 0, i))] = -h;
        a[(row, svec_index(size, 0, j))] = -h;
        a[(row, svec_index(size, i, j))] = h;
        b[row] = -1.0;
        cost[svec_index(size, i, j)] = -0.5 * e.w * h;
    }
    let gram_a = &a * a.transpose();
    let inv = gram_a
        .try_inverse()
        .ok_or_else(|| Error::Domain("dependent SDP constraints".into()))?;
    let project = |y: &DVector<f64>| -> DVector<f64> { y - a.transpose() * (&inv * (&a * y - &b)) };

    let mut z = DVector::zeros(dim);
    let mut u = DVector::zeros(dim);
    let mut x = DVector::zeros(dim);
    let mut iterations = 0;
    for it in 0..max_iters {
        iterations = it + 1;
        x = project(&(&z - &u + &cost));
        let z_new = to_svec(&psd_projection(&from_svec(&(&x + &u), size)));
        let dual = (&z_new - &z).amax();
        z = z_new;
        u += &x - &z;
        if (&x - &z).amax() < 1e-11 && dual < 1e-11 {
            break;
        }
    }
    let gram = from_svec(&z, size);
    let objective = g
        .edges
        .iter()
        .map(|e| e.w * 0.5 * (1.0 - gram[(e.i + 1, e.j + 1)]))
        .sum();
    Ok(DenseReference { objective, gram, residual: (&x - &z).amax(), iterations })
}
