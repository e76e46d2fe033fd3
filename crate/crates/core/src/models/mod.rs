//! Local clustering backends. Each produces per-cluster parameters that are
//! sufficient to assign any new point without the training data.

mod kmeans;
mod markov;
mod params;
mod select;

pub use kmeans::{kmeans_assign, kmeans_fit, kmeans_fit_rows, nearest, sq_dist, weighted_kmeans, KmeansFit};
pub use markov::{
    joint_log_likelihoods, markov_assign, markov_mixture_fit, mixture_log_likelihood, sequence_log_likelihood,
    MarkovFit,
};
pub use params::{ClusterModelParams, FitConfig, ModelKind};
pub use select::{fit_log_likelihood, parameter_count, select_k_local, Criterion, KSelection};

use crate::data::SiteData;
use crate::error::{FontError, Result};

/// A local fit of whichever kind matches the site's data.
#[derive(Debug, Clone)]
pub enum LocalFit {
    Kmeans(KmeansFit),
    Markov(MarkovFit),
}

impl LocalFit {
    pub fn params(&self) -> &ClusterModelParams {
        match self {
            LocalFit::Kmeans(f) => &f.params,
            LocalFit::Markov(f) => &f.params,
        }
    }

    pub fn labels(&self) -> &[usize] {
        match self {
            LocalFit::Kmeans(f) => &f.labels,
            LocalFit::Markov(f) => &f.labels,
        }
    }

    pub fn into_params(self) -> ClusterModelParams {
        match self {
            LocalFit::Kmeans(f) => f.params,
            LocalFit::Markov(f) => f.params,
        }
    }
}

/// k-means for feature rows, mixture Markov EM for sequences.
pub fn fit_local(data: &SiteData, k: usize, cfg: &FitConfig) -> Result<LocalFit> {
    match data {
        SiteData::Vectors(d) => kmeans_fit(d, k, cfg).map(LocalFit::Kmeans),
        SiteData::Sequences(d) => markov_mixture_fit(d, k, cfg).map(LocalFit::Markov),
    }
}

/// Applies a model's assignment rule to every subject of a site.
pub fn assign_all(params: &ClusterModelParams, data: &SiteData) -> Result<Vec<usize>> {
    match (params.kind, data) {
        (ModelKind::Kmeans, SiteData::Vectors(d)) => d.rows.iter().map(|x| kmeans_assign(params, x)).collect(),
        (ModelKind::MarkovMixture, SiteData::Sequences(d)) => {
            d.sequences.iter().map(|s| markov_assign(params, s)).collect()
        }
        (kind, SiteData::Vectors(_)) => Err(FontError::KindMismatch { expected: "kmeans", got: kind.as_str() }),
        (kind, SiteData::Sequences(_)) => {
            Err(FontError::KindMismatch { expected: "markov_mixture", got: kind.as_str() })
        }
    }
}
