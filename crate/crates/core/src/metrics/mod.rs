//! Clustering accuracy and diagnostic metrics.

mod alignment;
mod ari;
mod markov_stats;
mod matching;

pub use alignment::{weight_alignment, WeightAlignment};
pub use ari::{adjusted_rand_index, adjusted_rand_index_exact, ari_against_truth, ContingencyTable};
pub use markov_stats::{empirical_markov_stats, transition_divergence, ClusterMarkovStats, TransitionDivergence};
pub use matching::{hungarian, match_by_overlap, matched_overlap};
