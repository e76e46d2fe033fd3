//! Comparator methods: per-site local fits, equal-weight consensus, K-fed,
//! and the two oracle methods (pooled data, best single model chosen with
//! the truth) that no real deployment could run.

mod consensus;

pub use consensus::{connectivity_embedding, ConnectivityEmbedding};

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{stacked_truth, LabelMatrix, SequenceDataset, SiteData, VectorDataset};
use crate::error::{FontError, Result};
use crate::metrics::ari_against_truth;
use crate::models::{
    assign_all, fit_local, kmeans_fit, kmeans_fit_rows, nearest, weighted_kmeans, FitConfig, LocalFit,
};
use crate::rng::tag;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Font,
    Local,
    Consensus,
    Kfed,
    Pooled,
    BestLocal,
}

impl Method {
    pub const ALL: [Method; 6] =
        [Method::Font, Method::Local, Method::Consensus, Method::Kfed, Method::Pooled, Method::BestLocal];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Font => "font",
            Method::Local => "local",
            Method::Consensus => "consensus",
            Method::Kfed => "kfed",
            Method::Pooled => "pooled",
            Method::BestLocal => "best_local",
        }
    }

    /// Needs raw data from every site or the ground truth.
    pub fn is_oracle(self) -> bool {
        matches!(self, Method::Pooled | Method::BestLocal)
    }
}

impl std::str::FromStr for Method {
    type Err = FontError;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| FontError::ConfigInvalid(format!("unknown method `{s}`")))
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkResult {
    pub method: Method,
    /// One label per subject in stacked site order. For `local` each site's
    /// block uses that site's own cluster numbering.
    pub labels: Vec<usize>,
    /// ARI against the truth (outliers excluded); `None` without truth. For
    /// `local`, the unweighted mean of the per-site values.
    pub ari: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub site_aris: Option<Vec<f64>>,
    /// Index of the model chosen by `best_local`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selected_model: Option<usize>,
    pub wall_time: f64,
    pub oracle: bool,
}

impl BenchmarkResult {
    fn new(method: Method, labels: Vec<usize>, ari: Option<f64>, start: Instant) -> Self {
        Self {
            method,
            labels,
            ari,
            site_aris: None,
            selected_model: None,
            wall_time: start.elapsed().as_secs_f64(),
            oracle: method.is_oracle(),
        }
    }
}

/// Fit settings for the local model of a given site. Shared by every method
/// that fits per-site models so their fits coincide at a given seed.
pub fn site_fit_config(cfg: &FitConfig, site_id: usize) -> FitConfig {
    cfg.derived(&[tag("site-fit"), site_id as u64])
}

/// Fits every site's local model in parallel.
pub fn fit_sites(sites: &[SiteData], k: usize, cfg: &FitConfig) -> Result<Vec<LocalFit>> {
    sites.par_iter().map(|s| fit_local(s, k, &site_fit_config(cfg, s.site_id()))).collect()
}

/// Applies every model to every subject, in stacked site order.
pub fn label_matrix(fits: &[LocalFit], sites: &[SiteData]) -> Result<LabelMatrix> {
    let columns = fits
        .par_iter()
        .map(|f| {
            let mut col = Vec::new();
            for s in sites {
                col.extend(assign_all(f.params(), s)?);
            }
            Ok(col)
        })
        .collect::<Result<Vec<_>>>()?;
    LabelMatrix::new(columns, fits.iter().map(|f| f.params().k()).collect())
}

fn truth_ari(labels: &[usize], sites: &[SiteData]) -> Result<Option<f64>> {
    stacked_truth(sites).map(|t| ari_against_truth(labels, &t)).transpose()
}

/// Concatenates all sites into one dataset.
pub fn pool_sites(sites: &[SiteData]) -> Result<SiteData> {
    let first = sites.first().ok_or_else(|| FontError::EmptyInput("no sites".into()))?;
    let truth = stacked_truth(sites);
    match first {
        SiteData::Vectors(_) => {
            let mut rows = Vec::new();
            for s in sites {
                match s {
                    SiteData::Vectors(d) => rows.extend(d.rows.iter().cloned()),
                    SiteData::Sequences(_) => {
                        return Err(FontError::KindMismatch { expected: "vectors", got: "sequences" })
                    }
                }
            }
            let mut d = VectorDataset::new(usize::MAX, rows);
            if let Some(t) = truth {
                d = d.with_truth(t);
            }
            Ok(SiteData::Vectors(d))
        }
        SiteData::Sequences(f) => {
            let mut sequences = Vec::new();
            for s in sites {
                match s {
                    SiteData::Sequences(d) if d.states == f.states => sequences.extend(d.sequences.iter().cloned()),
                    SiteData::Sequences(d) => {
                        return Err(FontError::DimensionMismatch { expected: f.states, got: d.states })
                    }
                    SiteData::Vectors(_) => {
                        return Err(FontError::KindMismatch { expected: "sequences", got: "vectors" })
                    }
                }
            }
            let mut d = SequenceDataset::new(usize::MAX, f.states, sequences);
            d.true_labels = truth;
            Ok(SiteData::Sequences(d))
        }
    }
}

/// Each site clusters only its own subjects.
pub fn run_local(sites: &[SiteData], k: usize, cfg: &FitConfig) -> Result<BenchmarkResult> {
    let start = Instant::now();
    let fits = fit_sites(sites, k, cfg)?;
    let mut labels = Vec::new();
    let mut site_aris = Vec::new();
    let mut all_truth = true;
    for (fit, site) in fits.iter().zip(sites) {
        labels.extend_from_slice(fit.labels());
        match site.true_labels() {
            Some(t) => site_aris.push(ari_against_truth(fit.labels(), t)?),
            None => all_truth = false,
        }
    }
    let ari = all_truth.then(|| site_aris.iter().sum::<f64>() / site_aris.len() as f64);
    let mut res = BenchmarkResult::new(Method::Local, labels, ari, start);
    res.site_aris = all_truth.then_some(site_aris);
    Ok(res)
}

/// Equal-weight consensus of the label columns: k-means on the scaled top-`k`
/// eigenvectors of the average connectivity matrix.
pub fn run_consensus(
    lm: &LabelMatrix,
    k: usize,
    truth: Option<&[Option<usize>]>,
    cfg: &FitConfig,
) -> Result<BenchmarkResult> {
    let start = Instant::now();
    if lm.m() < 2 {
        return Err(FontError::TooFewModels { min: 2, got: lm.m() });
    }
    let emb = connectivity_embedding(lm, k)?;
    let weights: Vec<f64> = emb.multiplicity.iter().map(|&c| c as f64).collect();
    let fit = weighted_kmeans(&emb.rows, &weights, k, &cfg.derived(&[tag("consensus")]))?;
    let labels: Vec<usize> = emb.subject_index.iter().map(|&p| fit.labels[p]).collect();
    let ari = truth.map(|t| ari_against_truth(&labels, t)).transpose()?;
    Ok(BenchmarkResult::new(Method::Consensus, labels, ari, start))
}

/// K-fed: `k_local` centers per site, k-means on the pooled centers, then
/// every subject goes to its nearest global center.
pub fn run_kfed(sites: &[SiteData], k: usize, k_local: usize, cfg: &FitConfig) -> Result<BenchmarkResult> {
    let start = Instant::now();
    if k_local < k.min(1) {
        return Err(FontError::InvalidParams("k_local must be positive".into()));
    }
    let vecs: Vec<&VectorDataset> = sites
        .iter()
        .map(|s| match s {
            SiteData::Vectors(d) => Ok(d),
            SiteData::Sequences(_) => Err(FontError::KindMismatch { expected: "vectors", got: "sequences" }),
        })
        .collect::<Result<_>>()?;
    let local = vecs
        .par_iter()
        .map(|d| kmeans_fit(d, k_local, &site_fit_config(cfg, d.site_id)))
        .collect::<Result<Vec<_>>>()?;
    let landmarks: Vec<Vec<f64>> = local.iter().flat_map(|f| f.params.betas.iter().cloned()).collect();
    let global = kmeans_fit_rows(&landmarks, k, &cfg.derived(&[tag("kfed-global")]))?;
    let labels: Vec<usize> =
        vecs.iter().flat_map(|d| d.rows.iter().map(|x| nearest(&global.params.betas, x).0)).collect();
    let ari = truth_ari(&labels, sites)?;
    Ok(BenchmarkResult::new(Method::Kfed, labels, ari, start))
}

/// Oracle: one model fitted on all sites' data together.
pub fn run_pooled(sites: &[SiteData], k: usize, cfg: &FitConfig) -> Result<BenchmarkResult> {
    let start = Instant::now();
    let pooled = pool_sites(sites)?;
    let fit = fit_local(&pooled, k, &cfg.derived(&[tag("pooled")]))?;
    let labels = fit.labels().to_vec();
    let ari = truth_ari(&labels, sites)?;
    Ok(BenchmarkResult::new(Method::Pooled, labels, ari, start))
}

/// Oracle: the single local model whose labels for all subjects agree best
/// with the truth. Ties go to the lowest model index.
pub fn run_best_local(
    sites: &[SiteData],
    k: usize,
    truth: Option<&[Option<usize>]>,
    cfg: &FitConfig,
) -> Result<BenchmarkResult> {
    let start = Instant::now();
    let truth = truth.ok_or(FontError::TruthRequired)?;
    let fits = fit_sites(sites, k, cfg)?;
    let lm = label_matrix(&fits, sites)?;
    let (best, labels, ari) = best_column(&lm, truth)?;
    let mut res = BenchmarkResult::new(Method::BestLocal, labels, Some(ari), start);
    res.selected_model = Some(best);
    Ok(res)
}

/// Column of a label matrix with the highest ARI against `truth`.
pub fn best_column(lm: &LabelMatrix, truth: &[Option<usize>]) -> Result<(usize, Vec<usize>, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (m, col) in lm.columns.iter().enumerate() {
        let a = ari_against_truth(col, truth)?;
        if best.is_none_or(|(_, b)| a > b) {
            best = Some((m, a));
        }
    }
    let (m, a) = best.ok_or(FontError::TooFewModels { min: 1, got: 0 })?;
    Ok((m, lm.columns[m].clone(), a))
}
