//! The full one-shot pipeline: local fits, parameter broadcast, cross-site
//! labeling, and the weighted ensemble at the analysis center.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::messages::{
    check_round1, check_round2, Provenance, SiteMessageRound1, SiteMessageRound2, Transcript, Transport,
    PROTOCOL_VERSION,
};
use super::pseudo::{make_pseudo_sites, PseudoSiteConfig};
use crate::benchmarks::site_fit_config;
use crate::data::{LabelMatrix, SiteData};
use crate::ensemble::{
    agreement_matrix, build_distance_rep, ensemble_distance, euclidean, final_cluster, select_k_majority,
    spectral_weights, AgreementWeights, DistanceRep,
};
use crate::error::{FontError, Result};
use crate::linalg::EigenSolver;
use crate::models::{assign_all, fit_local, select_k_local, ClusterModelParams, Criterion, FitConfig};
use crate::rng::{self, tag};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FontConfig {
    /// Number of final clusters; `None` selects it per site and takes the majority.
    pub k: Option<usize>,
    /// Candidates for automatic selection.
    pub k_range: Vec<usize>,
    pub criterion: Criterion,
    pub fit: FitConfig,
    pub pseudo_sites: Option<PseudoSiteConfig>,
    pub transport: Transport,
    /// Models whose labels are replaced by uniform random labels before
    /// upload. Only for robustness experiments.
    pub noninformative_models: Vec<usize>,
}

impl Default for FontConfig {
    fn default() -> Self {
        Self {
            k: None,
            k_range: (2..=8).collect(),
            criterion: Criterion::Bic,
            fit: FitConfig::default(),
            pseudo_sites: None,
            transport: Transport::InProcess,
            noninformative_models: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub model_id: usize,
    pub site_id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
    pub k: usize,
    pub n_local: usize,
    pub degenerate: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FontTimings {
    pub local_fit: f64,
    pub labeling: f64,
    pub center: f64,
}

/// Serializable digest of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FontSummary {
    pub k: usize,
    pub local_ks: Vec<usize>,
    pub models: Vec<ModelSummary>,
    /// One weight per model; degenerate models get zero.
    pub weights: Vec<f64>,
    pub eigenvalue: f64,
    pub solver: EigenSolver,
    pub messages: usize,
    pub round1_bytes: usize,
    pub round2_bytes: usize,
    pub final_objective: f64,
    pub empty_clusters: usize,
    pub timings: FontTimings,
}

#[derive(Debug, Clone)]
pub struct FontOutcome {
    /// Final cluster of every subject in stacked site order.
    pub labels: Vec<usize>,
    pub summary: FontSummary,
    /// Agreement over the non-degenerate models only.
    pub agreement: Option<AgreementWeights>,
    pub label_matrix: LabelMatrix,
    pub params: Vec<ClusterModelParams>,
    pub reps: Vec<DistanceRep>,
    pub transcript: Transcript,
}

struct EffectiveSite<'a> {
    parent: usize,
    provenance: Option<Provenance>,
    data: std::borrow::Cow<'a, SiteData>,
    cfg: FitConfig,
}

fn validate_sites(sites: &[SiteData]) -> Result<()> {
    let first = sites.first().ok_or_else(|| FontError::EmptyInput("no sites".into()))?;
    let mut ids: Vec<usize> = sites.iter().map(SiteData::site_id).collect();
    ids.sort_unstable();
    if ids.windows(2).any(|w| w[0] == w[1]) {
        return Err(FontError::ConfigInvalid("site ids must be unique".into()));
    }
    for s in sites {
        s.validate()?;
        match (first, s) {
            (SiteData::Vectors(a), SiteData::Vectors(b)) if a.dim() != b.dim() => {
                return Err(FontError::DimensionMismatch { expected: a.dim(), got: b.dim() })
            }
            (SiteData::Sequences(a), SiteData::Sequences(b)) if a.states != b.states => {
                return Err(FontError::DimensionMismatch { expected: a.states, got: b.states })
            }
            (SiteData::Vectors(_), SiteData::Sequences(_)) => {
                return Err(FontError::KindMismatch { expected: "vectors", got: "sequences" })
            }
            (SiteData::Sequences(_), SiteData::Vectors(_)) => {
                return Err(FontError::KindMismatch { expected: "sequences", got: "vectors" })
            }
            _ => {}
        }
    }
    Ok(())
}

/// Runs one complete federated round over `sites` (stacked in the given order).
pub fn run_font(sites: &[SiteData], cfg: &FontConfig) -> Result<FontOutcome> {
    validate_sites(sites)?;
    cfg.fit.validate()?;
    let t0 = Instant::now();

    // Cluster counts: fixed, or chosen per site and put to a vote.
    let (k, local_ks) = match cfg.k {
        Some(k) => (k, vec![k; sites.len()]),
        None => {
            let ks = sites
                .par_iter()
                .map(|s| {
                    let range: Vec<usize> = cfg.k_range.iter().copied().filter(|&k| k <= s.len()).collect();
                    select_k_local(s, &range, cfg.criterion, &site_fit_config(&cfg.fit, s.site_id())).map(|sel| sel.k)
                })
                .collect::<Result<Vec<_>>>()?;
            (select_k_majority(&ks).ok_or_else(|| FontError::EmptyInput("no sites".into()))?, ks)
        }
    };
    if k < 2 {
        return Err(FontError::ConfigInvalid("the final clustering needs K >= 2".into()));
    }

    // Effective sites: the sites themselves or their resampled replicas.
    let mut effective: Vec<EffectiveSite> = Vec::new();
    for (s, site) in sites.iter().enumerate() {
        match &cfg.pseudo_sites {
            None => effective.push(EffectiveSite {
                parent: s,
                provenance: None,
                data: std::borrow::Cow::Borrowed(site),
                cfg: site_fit_config(&cfg.fit, site.site_id()),
            }),
            Some(p) => {
                for ps in make_pseudo_sites(site, p, cfg.fit.derived(&[tag("pseudo")]).seed)? {
                    let replica = ps.provenance.replica as u64;
                    effective.push(EffectiveSite {
                        parent: s,
                        provenance: Some(ps.provenance),
                        data: std::borrow::Cow::Owned(ps.data),
                        cfg: cfg.fit.derived(&[tag("site-fit"), site.site_id() as u64, replica + 1]),
                    });
                }
            }
        }
    }
    if effective.len() < 2 {
        return Err(FontError::ConfigInvalid(
            "a single model cannot be weighted; add sites or enable pseudo-sites".into(),
        ));
    }

    // Round 1: every effective site fits locally and broadcasts its parameters.
    let round1_out = effective
        .par_iter()
        .enumerate()
        .map(|(model_id, e)| {
            let fit = fit_local(&e.data, local_ks[e.parent], &e.cfg)?;
            let mut msg = SiteMessageRound1::new(sites[e.parent].site_id(), model_id, fit.params(), e.data.len());
            msg.provenance = e.provenance;
            cfg.transport.deliver(msg)
        })
        .collect::<Result<Vec<_>>>()?;
    let t_fit = t0.elapsed().as_secs_f64();
    let mut transcript = Transcript::default();
    for (msg, bytes) in round1_out {
        check_round1(&msg)?;
        transcript.round1_bytes += bytes;
        transcript.round1.push(msg);
    }
    transcript.round1.sort_by_key(|m| (m.site_id, m.model_id));
    let broadcast: BTreeMap<usize, ClusterModelParams> =
        transcript.round1.iter().map(|m| (m.model_id, m.params())).collect();
    let ks: BTreeMap<usize, usize> = broadcast.iter().map(|(&m, p)| (m, p.k())).collect();

    // Round 2: each site labels its own subjects under every broadcast model
    // and uploads one block per model it contributed.
    let t1 = Instant::now();
    let offsets: Vec<usize> = sites
        .iter()
        .scan(0, |acc, s| {
            let o = *acc;
            *acc += s.len();
            Some(o)
        })
        .collect();
    let n: usize = sites.iter().map(SiteData::len).sum();
    let round2_out = sites
        .par_iter()
        .enumerate()
        .map(|(s, site)| {
            let mut columns: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for (&m, params) in &broadcast {
                let col = if cfg.noninformative_models.contains(&m) {
                    (0..site.len())
                        .map(|i| {
                            let pid = (offsets[s] + i) as u64;
                            rng::stream(cfg.fit.seed, &[tag("noninformative"), m as u64, pid])
                                .random_range(0..params.k())
                        })
                        .collect()
                } else {
                    assign_all(params, site)?
                };
                columns.insert(m, col);
            }
            let blocks = effective.iter().filter(|e| e.parent == s).count().max(1);
            let len = site.len();
            (0..blocks)
                .map(|b| {
                    let (lo, hi) = (b * len / blocks, (b + 1) * len / blocks);
                    let msg = SiteMessageRound2 {
                        v: PROTOCOL_VERSION,
                        site_id: site.site_id(),
                        labels: columns.iter().map(|(&m, c)| (m, c[lo..hi].iter().map(|l| l + 1).collect())).collect(),
                        pseudo_ids: (lo..hi).map(|i| (offsets[s] + i) as u64).collect(),
                    };
                    cfg.transport.deliver(msg)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let t_label = t1.elapsed().as_secs_f64();

    // Center: consume uploads in site order and assemble the label matrix.
    let t2 = Instant::now();
    let m_eff = ks.len();
    let mut uploads: Vec<(SiteMessageRound2, usize)> = round2_out.into_iter().flatten().collect();
    uploads.sort_by_key(|(msg, _)| msg.site_id);
    let mut rows: Vec<(u64, Vec<usize>)> = Vec::with_capacity(n);
    for (msg, bytes) in uploads {
        check_round2(&msg, &ks)?;
        transcript.round2_bytes += bytes;
        for (j, &pid) in msg.pseudo_ids.iter().enumerate() {
            rows.push((pid, msg.labels.values().map(|c| c[j] - 1).collect()));
        }
        transcript.round2.push(msg);
    }
    rows.sort_by_key(|r| r.0);
    if rows.len() != n || rows.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(FontError::ProtocolViolation("uploaded subjects do not cover every pseudo id exactly once".into()));
    }
    if transcript.message_count() != 2 * m_eff {
        return Err(FontError::ProtocolViolation(format!(
            "{} messages exchanged, expected {}",
            transcript.message_count(),
            2 * m_eff
        )));
    }
    let columns: Vec<Vec<usize>> = (0..m_eff).map(|j| rows.iter().map(|r| r.1[j]).collect()).collect();
    let label_matrix = LabelMatrix::new(columns, ks.values().copied().collect())?;
    let params: Vec<ClusterModelParams> = broadcast.into_values().collect();

    let reps = params
        .par_iter()
        .zip(&label_matrix.columns)
        .enumerate()
        .map(|(m, (p, col))| build_distance_rep(m, p, col, euclidean))
        .collect::<Result<Vec<_>>>()?;
    let live: Vec<usize> = (0..m_eff).filter(|&m| !reps[m].degenerate).collect();
    let mut weights = vec![0.0; m_eff];
    let (agreement, eigenvalue, solver) = match live.len() {
        0 => return Err(FontError::AllDegenerate),
        1 => {
            log::warn!("only one model has a non-degenerate distance matrix");
            weights[live[0]] = 1.0;
            (None, 1.0, EigenSolver::PowerIteration)
        }
        _ => {
            let live_reps: Vec<DistanceRep> = live.iter().map(|&m| reps[m].clone()).collect();
            let aw = spectral_weights(agreement_matrix(&live_reps)?)?;
            for (&m, &w) in live.iter().zip(&aw.weights) {
                weights[m] = w;
            }
            let (value, solver) = (aw.eigenvalue, aw.solver);
            (Some(aw), value, solver)
        }
    };
    let cd = ensemble_distance(&reps, &weights)?;
    let fin = final_cluster(&cd, k, &cfg.fit.derived(&[tag("final")]))?;
    let t_center = t2.elapsed().as_secs_f64();

    let models = transcript
        .round1
        .iter()
        .map(|msg| ModelSummary {
            model_id: msg.model_id,
            site_id: msg.site_id,
            provenance: msg.provenance,
            k: msg.k,
            n_local: msg.n_local,
            degenerate: reps[msg.model_id].degenerate,
        })
        .collect();
    let summary = FontSummary {
        k,
        local_ks,
        models,
        weights,
        eigenvalue,
        solver,
        messages: transcript.message_count(),
        round1_bytes: transcript.round1_bytes,
        round2_bytes: transcript.round2_bytes,
        final_objective: fin.objective,
        empty_clusters: fin.empty_clusters,
        timings: FontTimings { local_fit: t_fit, labeling: t_label, center: t_center },
    };
    Ok(FontOutcome { labels: fin.labels, summary, agreement, label_matrix, params, reps, transcript })
}
