//! Dense symmetric eigen helpers.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{FontError, Result};

pub const POWER_MAX_STEPS: usize = 10_000;
pub const POWER_TOL: f64 = 1e-12;
pub const FULL_DECOMPOSITION_MAX: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenSolver {
    PowerIteration,
    FullDecomposition,
}

#[derive(Debug, Clone)]
pub struct LeadingEigen {
    pub value: f64,
    pub vector: Vec<f64>,
    pub solver: EigenSolver,
    pub steps: usize,
}

pub fn to_dmatrix(m: &[Vec<f64>]) -> DMatrix<f64> {
    let n = m.len();
    DMatrix::from_fn(n, n, |i, j| m[i][j])
}

fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Flips `v` so that its entries sum to a nonnegative value.
fn orient(mut v: Vec<f64>) -> Vec<f64> {
    if v.iter().sum::<f64>() < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    v
}

/// Power iteration from the uniform vector. Returns `None` when the residual
/// `||Gv - lambda v||` does not reach `tol * max(1, |lambda|)` within `max_steps`.
pub fn power_iteration(m: &[Vec<f64>], tol: f64, max_steps: usize) -> Option<LeadingEigen> {
    let n = m.len();
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    for step in 1..=max_steps {
        let w = mat_vec(m, &v);
        let lambda: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
        let residual = norm(&w.iter().zip(&v).map(|(a, b)| a - lambda * b).collect::<Vec<_>>());
        if residual <= tol * lambda.abs().max(1.0) {
            return Some(LeadingEigen {
                value: lambda,
                vector: orient(v),
                solver: EigenSolver::PowerIteration,
                steps: step,
            });
        }
        let wn = norm(&w);
        if wn == 0.0 || !wn.is_finite() {
            return None;
        }
        v = w.into_iter().map(|x| x / wn).collect();
    }
    None
}

/// Eigenpairs of a symmetric matrix sorted by decreasing eigenvalue (ties keep
/// solver order).
pub fn sym_eigen_desc(m: &DMatrix<f64>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order.iter().map(|&i| eig.eigenvectors.column(i).iter().copied().collect()).collect();
    (values, vectors)
}

/// Leading eigenpair of a symmetric matrix: power iteration first, full
/// decomposition as fallback for small matrices.
pub fn leading_eigen(m: &[Vec<f64>]) -> Result<LeadingEigen> {
    if let Some(e) = power_iteration(m, POWER_TOL, POWER_MAX_STEPS) {
        return Ok(e);
    }
    let n = m.len();
    if n > FULL_DECOMPOSITION_MAX {
        return Err(FontError::EigenFailure(format!(
            "power iteration stalled after {POWER_MAX_STEPS} steps and {n} x {n} exceeds the fallback size"
        )));
    }
    log::warn!("power iteration did not converge; falling back to full symmetric decomposition");
    let (values, vectors) = sym_eigen_desc(&to_dmatrix(m));
    let vector = orient(vectors.into_iter().next().ok_or_else(|| FontError::EigenFailure("empty matrix".into()))?);
    Ok(LeadingEigen { value: values[0], vector, solver: EigenSolver::FullDecomposition, steps: POWER_MAX_STEPS })
}
