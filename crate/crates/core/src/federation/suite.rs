//! Benchmark runs: every requested method on simulated or loaded data,
//! per-replicate records, and per-cell summaries.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pipeline::{run_font, FontConfig, FontOutcome};
use crate::benchmarks::{
    best_column, fit_sites, label_matrix, run_consensus, run_kfed, run_local, run_pooled, BenchmarkResult, Method,
};
use crate::data::{stacked_truth, SiteData};
use crate::error::{FontError, Result};
use crate::metrics::{ari_against_truth, weight_alignment};
use crate::rng::{derive_seed, tag};
use crate::simdata::{gen_gaussian_sites, Regime, SimulationConfig};

/// Settings shared by every method of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MethodOptions {
    pub methods: Vec<Method>,
    /// Final cluster count. Without it FONT selects one and the comparators reuse it.
    pub k: Option<usize>,
    pub font: FontConfig,
    /// Local centers per site for K-fed; defaults to `k`.
    pub kfed_k_local: Option<usize>,
    pub allow_oracle: bool,
}

impl Default for MethodOptions {
    fn default() -> Self {
        Self {
            methods: vec![Method::Font, Method::Local, Method::Consensus, Method::Kfed],
            k: None,
            font: FontConfig::default(),
            kfed_k_local: None,
            allow_oracle: false,
        }
    }
}

impl MethodOptions {
    /// Refuses oracle methods unless explicitly allowed.
    pub fn check_oracle(&self) -> Result<()> {
        match self.methods.iter().find(|m| m.is_oracle()) {
            Some(m) if !self.allow_oracle => Err(FontError::OracleNotAllowed(m.as_str().to_string())),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub setting: String,
    #[serde(rename = "M")]
    pub m: usize,
    pub sigma2: Option<f64>,
    pub n_range: Option<(usize, usize)>,
    pub replicate: usize,
    pub seed: u64,
    pub method: Method,
    pub k: usize,
    pub ari: Option<f64>,
    /// Correlation between FONT weights and per-model accuracy.
    pub weight_corr: Option<f64>,
    pub weights: Option<Vec<f64>>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub setting: String,
    #[serde(rename = "M")]
    pub m: usize,
    pub sigma2: Option<f64>,
    pub replicate: usize,
    pub method: Method,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub setting: String,
    #[serde(rename = "M")]
    pub m: usize,
    pub sigma2: Option<f64>,
    pub method: Method,
    /// Records with an ARI.
    pub replicates: usize,
    pub mean_ari: Option<f64>,
    /// Sample standard deviation; absent with fewer than two records.
    pub sd_ari: Option<f64>,
    pub mean_weight_corr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub notes: Vec<String>,
    pub records: Vec<ReplicateRecord>,
    pub failures: Vec<FailureRecord>,
    pub summary: Vec<CellSummary>,
}

impl RunReport {
    pub fn new(
        seed: u64,
        config: serde_json::Value,
        records: Vec<ReplicateRecord>,
        failures: Vec<FailureRecord>,
    ) -> Self {
        let summary = summarize(&records);
        Self {
            tool: "font".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed,
            config,
            notes: vec!["local ARI is the unweighted mean of per-site ARIs".into()],
            records,
            failures,
            summary,
        }
    }
}

/// Identifies the data a replicate ran on.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub setting: String,
    pub sigma2: Option<f64>,
    pub n_range: Option<(usize, usize)>,
}

/// Output of one replicate: records for the methods that succeeded,
/// failures for the rest, and the FONT outcome when it ran.
pub struct ReplicateOutput {
    pub records: Vec<ReplicateRecord>,
    pub failures: Vec<FailureRecord>,
    pub font: Option<FontOutcome>,
}

/// Runs every requested method once on `sites`. All methods share the same
/// local-fit seed so that per-site models coincide across methods.
pub fn run_replicate(
    sites: &[SiteData],
    cell: &Cell,
    replicate: usize,
    seed: u64,
    opts: &MethodOptions,
) -> ReplicateOutput {
    let truth = stacked_truth(sites);
    let mut font_cfg = opts.font.clone();
    font_cfg.fit.seed = seed;
    if opts.k.is_some() {
        font_cfg.k = opts.k;
    }
    let fit = font_cfg.fit.clone();
    let mut out = ReplicateOutput { records: Vec::new(), failures: Vec::new(), font: None };

    let record = |method: Method, k: usize, res: &BenchmarkResult| ReplicateRecord {
        setting: cell.setting.clone(),
        m: sites.len(),
        sigma2: cell.sigma2,
        n_range: cell.n_range,
        replicate,
        seed,
        method,
        k,
        ari: res.ari,
        weight_corr: None,
        weights: None,
        seconds: res.wall_time,
    };
    let fail = |method: Method, e: FontError| FailureRecord {
        setting: cell.setting.clone(),
        m: sites.len(),
        sigma2: cell.sigma2,
        replicate,
        method,
        error: e.to_string(),
    };

    let mut k = opts.k;
    if opts.methods.contains(&Method::Font) {
        let start = Instant::now();
        match run_font(sites, &font_cfg) {
            Ok(o) => {
                let seconds = start.elapsed().as_secs_f64();
                let ari = truth.as_ref().map(|t| ari_against_truth(&o.labels, t)).transpose();
                let corr = truth.as_ref().and_then(|t| font_weight_corr(&o, t));
                k = k.or(Some(o.summary.k));
                match ari {
                    Ok(ari) => out.records.push(ReplicateRecord {
                        setting: cell.setting.clone(),
                        m: sites.len(),
                        sigma2: cell.sigma2,
                        n_range: cell.n_range,
                        replicate,
                        seed,
                        method: Method::Font,
                        k: o.summary.k,
                        ari,
                        weight_corr: corr,
                        weights: Some(o.summary.weights.clone()),
                        seconds,
                    }),
                    Err(e) => out.failures.push(fail(Method::Font, e)),
                }
                out.font = Some(o);
            }
            Err(e) => out.failures.push(fail(Method::Font, e)),
        }
    }
    let Some(k) = k else {
        for &m in opts.methods.iter().filter(|&&m| m != Method::Font) {
            out.failures.push(fail(m, FontError::ConfigInvalid("k is required when FONT does not run".into())));
        }
        return out;
    };

    for &method in &opts.methods {
        let res = match method {
            Method::Font => continue,
            Method::Local => run_local(sites, k, &fit),
            Method::Kfed => run_kfed(sites, k, opts.kfed_k_local.unwrap_or(k), &fit),
            Method::Pooled => run_pooled(sites, k, &fit),
            Method::Consensus => {
                let start = Instant::now();
                let lm = match &out.font {
                    Some(o)
                        if o.summary.local_ks.iter().all(|&lk| lk == k)
                            && opts.font.pseudo_sites.is_none()
                            && opts.font.noninformative_models.is_empty() =>
                    {
                        Ok(o.label_matrix.clone())
                    }
                    _ => fit_sites(sites, k, &fit).and_then(|fits| label_matrix(&fits, sites)),
                };
                lm.and_then(|lm| run_consensus(&lm, k, truth.as_deref(), &fit)).map(|mut r| {
                    r.wall_time = start.elapsed().as_secs_f64();
                    r
                })
            }
            Method::BestLocal => {
                let start = Instant::now();
                match truth.as_deref() {
                    None => Err(FontError::TruthRequired),
                    Some(t) => fit_sites(sites, k, &fit)
                        .and_then(|fits| label_matrix(&fits, sites))
                        .and_then(|lm| best_column(&lm, t))
                        .map(|(m, labels, ari)| BenchmarkResult {
                            method: Method::BestLocal,
                            labels,
                            ari: Some(ari),
                            site_aris: None,
                            selected_model: Some(m),
                            wall_time: start.elapsed().as_secs_f64(),
                            oracle: true,
                        }),
                }
            }
        };
        match res {
            Ok(r) => out.records.push(record(method, k, &r)),
            Err(e) => out.failures.push(fail(method, e)),
        }
    }
    out
}

/// Pearson correlation between FONT weights and each model's ARI over all
/// subjects; `None` with fewer than three models or constant inputs.
pub fn font_weight_corr(o: &FontOutcome, truth: &[Option<usize>]) -> Option<f64> {
    let aris: Vec<f64> =
        o.label_matrix.columns.iter().map(|c| ari_against_truth(c, truth)).collect::<Result<_>>().ok()?;
    let wa = weight_alignment(&o.summary.weights, &aris).ok()?;
    (!wa.degenerate).then_some(wa.correlation)
}

/// Grid of simulated settings for a benchmark study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    pub regimes: Vec<Regime>,
    pub sites: Vec<usize>,
    pub sigma2: Vec<f64>,
    pub replicates: usize,
    /// Base simulation settings; `sites`, `sigma2`, `regime` and `seed` are overridden per cell.
    pub simulation: SimulationConfig,
    pub options: MethodOptions,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            regimes: vec![Regime::Homogeneous],
            sites: vec![10],
            sigma2: vec![0.05],
            replicates: 1,
            simulation: SimulationConfig::default(),
            options: MethodOptions::default(),
            seed: 0,
        }
    }
}

/// Seed of one replicate. The regime is deliberately left out so that
/// regimes of the same `(M, sigma2)` cell are compared at matched seeds.
pub fn replicate_seed(master: u64, m: usize, sigma2: f64, replicate: usize) -> u64 {
    derive_seed(master, &[m as u64, sigma2.to_bits(), replicate as u64])
}

/// Simulates every `(regime, M, sigma2, replicate)` combination and runs the
/// requested methods on each. Failed replicates are recorded, not fatal.
pub fn run_benchmark_suite(cfg: &SuiteConfig) -> Result<RunReport> {
    cfg.options.check_oracle()?;
    if cfg.replicates == 0 || cfg.regimes.is_empty() || cfg.sites.is_empty() || cfg.sigma2.is_empty() {
        return Err(FontError::ConfigInvalid("empty benchmark grid".into()));
    }
    let mut options = cfg.options.clone();
    options.k = options.k.or(Some(cfg.simulation.k));
    let mut jobs = Vec::new();
    for &regime in &cfg.regimes {
        for &m in &cfg.sites {
            for &sigma2 in &cfg.sigma2 {
                for r in 0..cfg.replicates {
                    jobs.push((regime, m, sigma2, r));
                }
            }
        }
    }
    let outputs: Vec<(Vec<ReplicateRecord>, Vec<FailureRecord>)> = jobs
        .par_iter()
        .map(|&(regime, m, sigma2, r)| {
            let seed = replicate_seed(cfg.seed, m, sigma2, r);
            let sim = SimulationConfig { sites: m, sigma2, regime, seed, ..cfg.simulation.clone() };
            let cell = Cell { setting: regime.as_str().into(), sigma2: Some(sigma2), n_range: Some(sim.n_range) };
            match gen_gaussian_sites(&sim) {
                Ok(data) => {
                    let o = run_replicate(&data.sites, &cell, r, derive_seed(seed, &[tag("fit")]), &options);
                    (o.records, o.failures)
                }
                Err(e) => {
                    let failures = options
                        .methods
                        .iter()
                        .map(|&method| FailureRecord {
                            setting: cell.setting.clone(),
                            m,
                            sigma2: Some(sigma2),
                            replicate: r,
                            method,
                            error: e.to_string(),
                        })
                        .collect();
                    (Vec::new(), failures)
                }
            }
        })
        .collect();
    let (records, failures): (Vec<_>, Vec<_>) = outputs.into_iter().unzip();
    Ok(RunReport::new(
        cfg.seed,
        serde_json::to_value(cfg)?,
        records.into_iter().flatten().collect(),
        failures.into_iter().flatten().collect(),
    ))
}

/// Runs the methods `replicates` times on fixed data, varying only the fit seed.
pub fn run_dataset(
    sites: &[SiteData],
    cell: &Cell,
    replicates: usize,
    seed: u64,
    opts: &MethodOptions,
    config: serde_json::Value,
) -> Result<RunReport> {
    opts.check_oracle()?;
    if replicates == 0 {
        return Err(FontError::ConfigInvalid("replicates must be positive".into()));
    }
    let outputs: Vec<ReplicateOutput> = (0..replicates)
        .into_par_iter()
        .map(|r| run_replicate(sites, cell, r, derive_seed(seed, &[tag("replicate"), r as u64]), opts))
        .collect();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for o in outputs {
        records.extend(o.records);
        failures.extend(o.failures);
    }
    Ok(RunReport::new(seed, config, records, failures))
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Mean and sample standard deviation of ARI per `(setting, M, sigma2, method)`,
/// in order of first appearance.
pub fn summarize(records: &[ReplicateRecord]) -> Vec<CellSummary> {
    let mut keys: Vec<(String, usize, Option<u64>, Method)> = Vec::new();
    for r in records {
        let key = (r.setting.clone(), r.m, r.sigma2.map(f64::to_bits), r.method);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(setting, m, s2, method)| {
            let group: Vec<&ReplicateRecord> = records
                .iter()
                .filter(|r| r.setting == setting && r.m == m && r.sigma2.map(f64::to_bits) == s2 && r.method == method)
                .collect();
            let aris: Vec<f64> = group.iter().filter_map(|r| r.ari).collect();
            let corrs: Vec<f64> = group.iter().filter_map(|r| r.weight_corr).collect();
            let mean_ari = mean(&aris);
            let sd_ari = (aris.len() >= 2).then(|| {
                let mu = mean_ari.unwrap_or(0.0);
                (aris.iter().map(|a| (a - mu).powi(2)).sum::<f64>() / (aris.len() - 1) as f64).sqrt()
            });
            CellSummary {
                setting,
                m,
                sigma2: s2.map(f64::from_bits),
                method,
                replicates: aris.len(),
                mean_ari,
                sd_ari,
                mean_weight_corr: mean(&corrs),
            }
        })
        .collect()
}
