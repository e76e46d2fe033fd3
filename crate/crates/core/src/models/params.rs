use serde::{Deserialize, Serialize};

use crate::error::{FontError, Result};

/// Which local clustering backend produced a set of parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Kmeans,
    MarkovMixture,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Kmeans => "kmeans",
            ModelKind::MarkovMixture => "markov_mixture",
        }
    }
}

const PROB_TOL: f64 = 1e-9;

/// A fitted local model: one parameter vector per cluster plus the
/// kind-specific metadata needed to assign new points.
///
/// For `MarkovMixture` each beta is `u` (length `states`) followed by the
/// row-major transition matrix (length `states * states`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModelParams {
    pub kind: ModelKind,
    pub betas: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixing: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<usize>,
}

impl ClusterModelParams {
    pub fn kmeans(centers: Vec<Vec<f64>>) -> Self {
        Self { kind: ModelKind::Kmeans, betas: centers, mixing: None, states: None }
    }

    /// Packs per-component initial vectors and transition matrices.
    pub fn markov(initial: &[Vec<f64>], transitions: &[Vec<Vec<f64>>], mixing: Vec<f64>) -> Self {
        let states = initial.first().map_or(0, Vec::len);
        let betas = initial
            .iter()
            .zip(transitions)
            .map(|(u, t)| u.iter().copied().chain(t.iter().flatten().copied()).collect())
            .collect();
        Self { kind: ModelKind::MarkovMixture, betas, mixing: Some(mixing), states: Some(states) }
    }

    pub fn k(&self) -> usize {
        self.betas.len()
    }

    pub fn dim(&self) -> usize {
        self.betas.first().map_or(0, Vec::len)
    }

    /// Initial-state probabilities of Markov component `k`.
    pub fn initial(&self, k: usize) -> &[f64] {
        let s = self.states.unwrap_or(0);
        &self.betas[k][..s]
    }

    /// Row `from` of the transition matrix of Markov component `k`.
    pub fn transition_row(&self, k: usize, from: usize) -> &[f64] {
        let s = self.states.unwrap_or(0);
        &self.betas[k][s + from * s..s + (from + 1) * s]
    }

    /// Returns a copy with components reordered so that new component `j`
    /// is old component `perm[j]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            kind: self.kind,
            betas: perm.iter().map(|&j| self.betas[j].clone()).collect(),
            mixing: self.mixing.as_ref().map(|m| perm.iter().map(|&j| m[j]).collect()),
            states: self.states,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(FontError::InvalidParams(msg));
        if self.betas.is_empty() {
            return bad("no cluster parameters".into());
        }
        let d = self.dim();
        if self.betas.iter().any(|b| b.len() != d) {
            return bad("cluster parameter vectors differ in length".into());
        }
        if self.betas.iter().flatten().any(|v| !v.is_finite()) {
            return Err(FontError::NonFinite);
        }
        if self.kind == ModelKind::MarkovMixture {
            let Some(s) = self.states else {
                return bad("markov mixture without state count".into());
            };
            if d != s + s * s {
                return bad(format!("markov beta length {d} != S + S^2 for S = {s}"));
            }
            let Some(mixing) = &self.mixing else {
                return bad("markov mixture without mixing proportions".into());
            };
            if mixing.len() != self.k() {
                return bad(format!("{} mixing weights for {} components", mixing.len(), self.k()));
            }
            let is_simplex = |v: &[f64]| v.iter().all(|&x| x >= 0.0) && (v.iter().sum::<f64>() - 1.0).abs() <= PROB_TOL;
            if !is_simplex(mixing) {
                return bad("mixing proportions are not a probability vector".into());
            }
            for k in 0..self.k() {
                if !is_simplex(self.initial(k)) {
                    return bad(format!("initial probabilities of component {} do not sum to 1", k + 1));
                }
                for a in 0..s {
                    if !is_simplex(self.transition_row(k, a)) {
                        return bad(format!("transition row {} of component {} does not sum to 1", a + 1, k + 1));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Settings shared by every local and final fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub restarts: usize,
    pub max_iter: usize,
    /// Relative objective change below which iteration stops.
    pub tol: f64,
    /// Probability floor for Markov parameters.
    pub smoothing: f64,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { restarts: 10, max_iter: 300, tol: 1e-6, smoothing: 1e-6, seed: 0 }
    }
}

impl FitConfig {
    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    /// Same settings with the seed of sub-stream `path`.
    pub fn derived(&self, path: &[u64]) -> Self {
        self.with_seed(crate::rng::derive_seed(self.seed, path))
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iter == 0 {
            return Err(FontError::ConfigInvalid("restarts and max_iter must be positive".into()));
        }
        if !(self.tol >= 0.0) || !(self.smoothing >= 0.0 && self.smoothing < 1.0) {
            return Err(FontError::ConfigInvalid("tol must be >= 0 and smoothing in [0, 1)".into()));
        }
        Ok(())
    }
}
