//! Empirical initial/transition frequencies per cluster, and their divergence
//! between two groups of subjects (e.g. two sites) under the same clustering.

use serde::{Deserialize, Serialize};

use crate::data::SequenceDataset;
use crate::error::{FontError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterMarkovStats {
    pub initial: Vec<f64>,
    /// Row-normalized transition frequencies; rows without any outgoing
    /// transition are uniform and listed in `uniform_rows`.
    pub transitions: Vec<Vec<f64>>,
    pub count: usize,
    pub empty: bool,
    pub uniform_rows: Vec<usize>,
}

pub fn empirical_markov_stats(
    data: &SequenceDataset,
    labels: &[usize],
    k: usize,
    states: usize,
) -> Result<Vec<ClusterMarkovStats>> {
    if labels.len() != data.len() {
        return Err(FontError::LengthMismatch { a: labels.len(), b: data.len() });
    }
    let mut init = vec![vec![0.0; states]; k];
    let mut trans = vec![vec![vec![0.0; states]; states]; k];
    let mut counts = vec![0usize; k];
    for (seq, &l) in data.sequences.iter().zip(labels) {
        if l >= k {
            return Err(FontError::LabelOutOfRange { label: l + 1, k });
        }
        if let Some(&s) = seq.iter().find(|&&s| s >= states) {
            return Err(FontError::InvalidState { state: s + 1, states });
        }
        counts[l] += 1;
        if let Some(&first) = seq.first() {
            init[l][first] += 1.0;
        }
        for w in seq.windows(2) {
            trans[l][w[0]][w[1]] += 1.0;
        }
    }
    let uniform = 1.0 / states as f64;
    Ok((0..k)
        .map(|c| {
            let empty = counts[c] == 0;
            let initial =
                if empty { vec![uniform; states] } else { init[c].iter().map(|x| x / counts[c] as f64).collect() };
            let mut uniform_rows = Vec::new();
            let transitions = trans[c]
                .iter()
                .enumerate()
                .map(|(a, row)| {
                    let total: f64 = row.iter().sum();
                    if total > 0.0 {
                        row.iter().map(|x| x / total).collect()
                    } else {
                        uniform_rows.push(a);
                        vec![uniform; states]
                    }
                })
                .collect();
            ClusterMarkovStats { initial, transitions, count: counts[c], empty, uniform_rows }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionDivergence {
    /// Mean over clusters of the Frobenius norm of the transition difference.
    pub mean_frob_t: f64,
    /// Mean over clusters of the Euclidean norm of the initial-probability difference.
    pub mean_norm_u: f64,
    /// Clusters non-empty on both sides (the ones averaged).
    pub clusters: usize,
}

/// Compares index-matched cluster statistics. Clusters empty on either side
/// are skipped.
pub fn transition_divergence(a: &[ClusterMarkovStats], b: &[ClusterMarkovStats]) -> Result<TransitionDivergence> {
    if a.len() != b.len() {
        return Err(FontError::ShapeMismatch(format!("{} vs {} clusters", a.len(), b.len())));
    }
    let (mut frob, mut norm, mut used) = (0.0, 0.0, 0usize);
    for (x, y) in a.iter().zip(b) {
        if x.initial.len() != y.initial.len() || x.transitions.len() != y.transitions.len() {
            return Err(FontError::ShapeMismatch("state counts differ".into()));
        }
        if x.empty || y.empty {
            continue;
        }
        used += 1;
        frob += x
            .transitions
            .iter()
            .flatten()
            .zip(y.transitions.iter().flatten())
            .map(|(p, q)| (p - q) * (p - q))
            .sum::<f64>()
            .sqrt();
        norm += x.initial.iter().zip(&y.initial).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
    }
    if used == 0 {
        return Err(FontError::EmptyInput("no cluster is populated on both sides".into()));
    }
    Ok(TransitionDivergence { mean_frob_t: frob / used as f64, mean_norm_u: norm / used as f64, clusters: used })
}
