use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{categorical, dirichlet, GroundTruth, MultiSiteDataset};
use crate::data::{SequenceDataset, SiteData};
use crate::error::{FontError, Result};
use crate::rng::{self, tag};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MarkovSimConfig {
    pub sites: usize,
    pub k: usize,
    pub states: usize,
    /// Inclusive range of per-site subject counts.
    pub n_range: (usize, usize),
    /// Inclusive range of sequence lengths.
    pub lengths: (usize, usize),
    /// Weight of each component's deterministic pattern against a uniform
    /// background, in (0, 1]. At 1 every chain is deterministic.
    pub separation: f64,
    pub dirichlet_alpha: f64,
    pub seed: u64,
}

impl Default for MarkovSimConfig {
    fn default() -> Self {
        Self {
            sites: 2,
            k: 4,
            states: 5,
            n_range: (200, 400),
            lengths: (16, 16),
            separation: 0.6,
            dirichlet_alpha: 1.0,
            seed: 0,
        }
    }
}

impl MarkovSimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(FontError::ConfigInvalid(m.to_string()));
        if self.sites == 0 || self.k == 0 || self.states < 2 {
            return bad("need at least one site, one component and two states");
        }
        if self.k > self.states {
            return bad("component patterns need k <= states");
        }
        if !(self.separation > 0.0 && self.separation <= 1.0) {
            return bad("separation must lie in (0, 1]");
        }
        if self.lengths.0 < 2 || self.lengths.0 > self.lengths.1 {
            return bad("lengths must satisfy 2 <= min <= max");
        }
        if self.n_range.0 < self.k || self.n_range.0 > self.n_range.1 {
            return bad("n_range must satisfy k <= min <= max");
        }
        if !(self.dirichlet_alpha > 0.0) {
            return bad("dirichlet_alpha must be positive");
        }
        Ok(())
    }

    /// Component `c` starts in state `c` and moves `a -> (a + c) mod S`, each
    /// mixed with the uniform distribution at weight `1 - separation`.
    pub fn chains(&self) -> (Vec<Vec<f64>>, Vec<Vec<Vec<f64>>>) {
        let s = self.states;
        let bg = (1.0 - self.separation) / s as f64;
        let initial =
            (0..self.k).map(|c| (0..s).map(|a| bg + if a == c { self.separation } else { 0.0 }).collect()).collect();
        let transitions = (0..self.k)
            .map(|c| {
                (0..s)
                    .map(|a| (0..s).map(|b| bg + if b == (a + c) % s { self.separation } else { 0.0 }).collect())
                    .collect()
            })
            .collect();
        (initial, transitions)
    }
}

/// Sequences from a mixture of Markov chains shared by all sites; only the
/// mixing proportions (Dirichlet draws) differ between sites.
pub fn gen_markov_sites(cfg: &MarkovSimConfig) -> Result<MultiSiteDataset> {
    cfg.validate()?;
    let (initial, transitions) = cfg.chains();
    let mut sites = Vec::with_capacity(cfg.sites);
    for m in 0..cfg.sites {
        let mut r = rng::stream(cfg.seed, &[tag("markov-site"), m as u64]);
        let n = r.random_range(cfg.n_range.0..=cfg.n_range.1);
        let props = dirichlet(cfg.k, cfg.dirichlet_alpha, &mut r)?;
        let mut sequences = Vec::with_capacity(n);
        let mut truth = Vec::with_capacity(n);
        for _ in 0..n {
            let c = categorical(&props, &mut r);
            let len = r.random_range(cfg.lengths.0..=cfg.lengths.1);
            let mut seq = vec![categorical(&initial[c], &mut r)];
            while seq.len() < len {
                let prev = *seq.last().expect("nonempty");
                seq.push(categorical(&transitions[c][prev], &mut r));
            }
            sequences.push(seq);
            truth.push(Some(c));
        }
        let mut d = SequenceDataset::new(m, cfg.states, sequences);
        d.true_labels = Some(truth);
        sites.push(SiteData::Sequences(d));
    }
    Ok(MultiSiteDataset {
        sites,
        truth: Some(GroundTruth::Markov { initial, transitions }),
        contaminated_sites: Vec::new(),
        seed: cfg.seed,
    })
}
