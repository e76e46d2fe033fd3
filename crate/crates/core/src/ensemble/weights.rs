use serde::{Deserialize, Serialize};

use crate::error::{FontError, Result};
use crate::linalg::{leading_eigen, EigenSolver};

/// Agreement matrix with its leading eigenvector and the derived weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementWeights {
    pub g: Vec<Vec<f64>>,
    pub eigenvalue: f64,
    pub leading_eigvec: Vec<f64>,
    /// Entrywise absolute value of the unit leading eigenvector.
    pub weights: Vec<f64>,
    pub solver: EigenSolver,
    /// Whether every entry of `g` was strictly positive, which guarantees a
    /// single-signed leading eigenvector.
    pub positive: bool,
}

pub fn spectral_weights(g: Vec<Vec<f64>>) -> Result<AgreementWeights> {
    let m = g.len();
    if m < 2 {
        return Err(FontError::TooFewModels { min: 2, got: m });
    }
    for (i, row) in g.iter().enumerate() {
        if row.len() != m {
            return Err(FontError::ShapeMismatch(format!("row {i} has {} entries, expected {m}", row.len())));
        }
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() || (v - g[j][i]).abs() > 1e-12 * v.abs().max(1.0) {
                return Err(FontError::ShapeMismatch("agreement matrix is not symmetric".into()));
            }
        }
    }
    let positive = g.iter().flatten().all(|&v| v > 0.0);
    if !positive {
        log::warn!("agreement matrix has non-positive entries; leading eigenvector may change sign");
    }
    let lead = leading_eigen(&g)?;
    let norm = lead.vector.iter().map(|x| x * x).sum::<f64>().sqrt();
    let leading_eigvec: Vec<f64> = lead.vector.iter().map(|x| x / norm).collect();
    let weights = leading_eigvec.iter().map(|x| x.abs()).collect();
    Ok(AgreementWeights { g, eigenvalue: lead.value, leading_eigvec, weights, solver: lead.solver, positive })
}
