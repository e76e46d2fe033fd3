//! Ensemble of local models: label-switching-invariant distance
//! representations, spectral agreement weights, the weighted consensus
//! distance, and the final clustering.

mod agreement;
mod consensus;
mod rep;
mod weights;

pub use agreement::{agreement_matrix, cosine_to_reference, rep_inner};
pub use consensus::{
    ensemble_distance, final_cluster, profile_embedding, ConsensusDistance, FinalClustering, DENSE_EXPORT_MAX,
};
pub use rep::{build_distance_rep, euclidean, DistanceRep};
pub use weights::{spectral_weights, AgreementWeights};

/// Most frequent value; ties go to the smallest.
pub fn select_k_majority(local_ks: &[usize]) -> Option<usize> {
    let mut counts = std::collections::BTreeMap::new();
    for &k in local_ks {
        *counts.entry(k).or_insert(0usize) += 1;
    }
    let mut best: Option<(usize, usize)> = None;
    for (k, c) in counts {
        if best.is_none_or(|(_, bc)| c > bc) {
            best = Some((k, c));
        }
    }
    best.map(|(k, _)| k)
}
