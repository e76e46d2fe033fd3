//! Synthetic multi-site data: Gaussian mixtures under the homogeneous,
//! imbalanced and contaminated regimes, and mixtures of Markov chains.

mod gaussian;
mod io;
mod markov;

pub use gaussian::{gen_gaussian_sites, MuMode, Regime, SimulationConfig};
pub use io::{read_dataset, write_dataset, Manifest, SiteFileEntry, MANIFEST_FILE};
pub use markov::{gen_markov_sites, MarkovSimConfig};

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::data::SiteData;
use crate::error::{FontError, Result};
use crate::models::ClusterModelParams;

/// Parameters the data were generated from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroundTruth {
    Gaussian { mus: Vec<Vec<f64>>, sigma2: f64 },
    Markov { initial: Vec<Vec<f64>>, transitions: Vec<Vec<Vec<f64>>> },
}

impl GroundTruth {
    /// The generating parameters as a cluster model.
    pub fn params(&self) -> ClusterModelParams {
        match self {
            GroundTruth::Gaussian { mus, .. } => ClusterModelParams::kmeans(mus.clone()),
            GroundTruth::Markov { initial, transitions } => {
                let k = initial.len();
                ClusterModelParams::markov(initial, transitions, vec![1.0 / k as f64; k])
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiSiteDataset {
    pub sites: Vec<SiteData>,
    pub truth: Option<GroundTruth>,
    /// Sites that received outlying observations.
    pub contaminated_sites: Vec<usize>,
    pub seed: u64,
}

impl MultiSiteDataset {
    pub fn total_subjects(&self) -> usize {
        self.sites.iter().map(SiteData::len).sum()
    }
}

/// Draws from a symmetric Dirichlet via normalized gamma variates.
pub(crate) fn dirichlet<R: Rng>(k: usize, alpha: f64, rng: &mut R) -> Result<Vec<f64>> {
    let gamma = Gamma::new(alpha, 1.0).map_err(|e| FontError::ConfigInvalid(format!("dirichlet alpha: {e}")))?;
    loop {
        let g: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
        let total: f64 = g.iter().sum();
        if total > 0.0 {
            return Ok(g.into_iter().map(|x| x / total).collect());
        }
    }
}

/// Index drawn from a discrete distribution.
pub(crate) fn categorical<R: Rng>(probs: &[f64], rng: &mut R) -> usize {
    let mut x = rng.random::<f64>();
    for (i, &p) in probs.iter().enumerate() {
        if x < p {
            return i;
        }
        x -= p;
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}
