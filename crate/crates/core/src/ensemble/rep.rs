use serde::{Deserialize, Serialize};

use crate::error::{FontError, Result};
use crate::models::ClusterModelParams;

/// Euclidean distance between flattened parameter vectors.
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    crate::models::sq_dist(a, b).sqrt()
}

/// Compressed subject-by-subject distance matrix of one model: entry `(i, j)`
/// is `table[labels[i]][labels[j]]`. Relabeling the model's clusters permutes
/// `table` and `labels` together and leaves the expanded matrix unchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceRep {
    pub model_id: usize,
    pub labels: Vec<usize>,
    pub table: Vec<Vec<f64>>,
    /// Subjects per cluster.
    pub counts: Vec<usize>,
    /// Frobenius norm of the expanded matrix.
    pub frob_norm: f64,
    /// Set when the expanded matrix is identically zero (e.g. every subject in one cluster).
    pub degenerate: bool,
}

impl DistanceRep {
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn k(&self) -> usize {
        self.table.len()
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.table[self.labels[i]][self.labels[j]]
    }

    /// Materializes the full matrix. Test and export use only.
    pub fn dense(&self) -> Vec<Vec<f64>> {
        (0..self.n()).map(|i| (0..self.n()).map(|j| self.entry(i, j)).collect()).collect()
    }
}

/// Builds the distance representation of a model from its cluster parameters
/// and the labels it assigns to all subjects.
pub fn build_distance_rep<F>(
    model_id: usize,
    params: &ClusterModelParams,
    labels: &[usize],
    metric: F,
) -> Result<DistanceRep>
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    let k = params.k();
    if let Some(&l) = labels.iter().find(|&&l| l >= k) {
        return Err(FontError::LabelOutOfRange { label: l + 1, k });
    }
    let mut table = vec![vec![0.0; k]; k];
    for a in 0..k {
        for b in a + 1..k {
            let d = metric(&params.betas[a], &params.betas[b]);
            if !(d.is_finite() && d >= 0.0) {
                return Err(FontError::InvalidParams(format!(
                    "metric returned {d} for clusters {} and {}",
                    a + 1,
                    b + 1
                )));
            }
            table[a][b] = d;
            table[b][a] = d;
        }
    }
    let mut counts = vec![0usize; k];
    for &l in labels {
        counts[l] += 1;
    }
    let mut sq = 0.0;
    for a in 0..k {
        for b in 0..k {
            sq += (counts[a] * counts[b]) as f64 * table[a][b] * table[a][b];
        }
    }
    let frob_norm = sq.sqrt();
    let degenerate = frob_norm == 0.0;
    if degenerate {
        log::warn!("model {model_id} yields an all-zero distance matrix");
    }
    Ok(DistanceRep { model_id, labels: labels.to_vec(), table, counts, frob_norm, degenerate })
}
