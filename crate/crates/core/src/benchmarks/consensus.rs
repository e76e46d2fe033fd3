//! Equal-weight consensus clustering through the spectral factorization of
//! the average connectivity matrix.
//!
//! With `Psi` the subjects-by-clusters one-hot matrix stacked over all
//! models, the average connectivity is `Psi Psi^T / M`. Its nonzero
//! eigenpairs come from the small matrix `Psi^T Psi / M` (the stacked label
//! contingency table), so the scaled eigenvector rows are computed without
//! forming anything subject-by-subject. Rows only depend on a subject's label
//! profile, so k-means runs on distinct profiles weighted by multiplicity.

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::data::LabelMatrix;
use crate::error::{FontError, Result};
use crate::linalg::sym_eigen_desc;

/// Rows of the scaled top-`k` eigenvectors of the average connectivity
/// matrix, one per distinct label profile.
#[derive(Debug, Clone)]
pub struct ConnectivityEmbedding {
    pub rows: Vec<Vec<f64>>,
    pub multiplicity: Vec<usize>,
    pub subject_index: Vec<usize>,
    /// Top-`k` eigenvalues, floored at zero.
    pub eigenvalues: Vec<f64>,
}

impl ConnectivityEmbedding {
    /// Embedding row of subject `i`.
    pub fn subject_row(&self, i: usize) -> &[f64] {
        &self.rows[self.subject_index[i]]
    }
}

pub fn connectivity_embedding(lm: &LabelMatrix, k: usize) -> Result<ConnectivityEmbedding> {
    lm.validate()?;
    let m = lm.m();
    if m == 0 || lm.n() == 0 {
        return Err(FontError::EmptyInput("label matrix is empty".into()));
    }
    let offsets: Vec<usize> = lm
        .ks
        .iter()
        .scan(0, |acc, &k| {
            let o = *acc;
            *acc += k;
            Some(o)
        })
        .collect();
    let dim: usize = lm.ks.iter().sum();

    let mut lookup: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut profiles: Vec<Vec<usize>> = Vec::new();
    let mut multiplicity = Vec::new();
    let mut subject_index = Vec::with_capacity(lm.n());
    for i in 0..lm.n() {
        let idx: Vec<usize> = lm.columns.iter().zip(&offsets).map(|(c, o)| c[i] + o).collect();
        let p = *lookup.entry(idx.clone()).or_insert_with(|| {
            profiles.push(idx);
            multiplicity.push(0);
            profiles.len() - 1
        });
        multiplicity[p] += 1;
        subject_index.push(p);
    }

    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for (idx, &mult) in profiles.iter().zip(&multiplicity) {
        for &a in idx {
            for &b in idx {
                h[(a, b)] += mult as f64 / m as f64;
            }
        }
    }
    let (values, vectors) = sym_eigen_desc(&h);
    if values.iter().any(|v| !v.is_finite()) {
        return Err(FontError::EigenFailure("non-finite eigenvalue in connectivity factorization".into()));
    }
    let scale = 1.0 / (m as f64).sqrt();
    let mut eigenvalues = Vec::with_capacity(k);
    let mut columns: Vec<Option<&Vec<f64>>> = Vec::with_capacity(k);
    for j in 0..k {
        match values.get(j) {
            Some(&v) if v > 0.0 => {
                eigenvalues.push(v);
                columns.push(Some(&vectors[j]));
            }
            _ => {
                eigenvalues.push(0.0);
                columns.push(None);
            }
        }
    }
    let rows = profiles
        .iter()
        .map(|idx| columns.iter().map(|q| q.map_or(0.0, |q| scale * idx.iter().map(|&a| q[a]).sum::<f64>())).collect())
        .collect();
    Ok(ConnectivityEmbedding { rows, multiplicity, subject_index, eigenvalues })
}
