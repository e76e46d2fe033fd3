//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.
//!
//! Run with `cargo test --release -p font-core --test acceptance`. Every
//! numeric threshold below is fixed up front; nothing is tuned to the outcome.

use std::process::ExitCode;
use std::time::Instant;

use num_rational::Ratio;
use rand::Rng;
use rayon::prelude::*;

use font_core::benchmarks::{run_local, Method};
use font_core::data::{stacked_truth, SiteData};
use font_core::ensemble::{agreement_matrix, build_distance_rep, cosine_to_reference, euclidean, DistanceRep};
use font_core::federation::{
    check_round1, font_weight_corr, replicate_seed, run_font, run_replicate, Cell, FontConfig, FontOutcome,
    MethodOptions, PseudoSiteConfig, Transport,
};
use font_core::metrics::{
    adjusted_rand_index, adjusted_rand_index_exact, ari_against_truth, empirical_markov_stats, hungarian,
    transition_divergence,
};
use font_core::models::{kmeans_fit, markov_mixture_fit, FitConfig, ModelKind};
use font_core::rng::{self, derive_seed, tag};
use font_core::simdata::{gen_gaussian_sites, gen_markov_sites, MarkovSimConfig, Regime, SimulationConfig};

const MASTER_SEED: u64 = 20_240_601;
const REPLICATES: usize = 50;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Protocol bookkeeping shared by every pipeline run in this file.
#[derive(Default)]
struct ProtocolLog {
    runs: usize,
    violations: Vec<String>,
}

impl ProtocolLog {
    fn audit(&mut self, what: &str, o: &FontOutcome) {
        self.runs += 1;
        let m_eff = o.summary.models.len();
        if o.transcript.message_count() != 2 * m_eff {
            self.violations.push(format!("{what}: {} messages for M = {m_eff}", o.transcript.message_count()));
        }
        for msg in &o.transcript.round1 {
            if let Err(e) = check_round1(msg) {
                self.violations.push(format!("{what}: {e}"));
            }
        }
        let uploaded: usize = o.transcript.round2.iter().map(|m| m.pseudo_ids.len()).sum();
        if uploaded != o.label_matrix.n() {
            self.violations.push(format!("{what}: {uploaded} uploaded subjects for N = {}", o.label_matrix.n()));
        }
    }
}

// ---------------------------------------------------------------- AC1

fn dense_cosine(a: &DistanceRep, b: &DistanceRep) -> f64 {
    let n = a.n();
    let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let (x, y) = (a.entry(i, j), b.entry(i, j));
            ab += x * y;
            aa += x * x;
            bb += y * y;
        }
    }
    ab / (aa.sqrt() * bb.sqrt())
}

fn ac1() -> Verdict {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for inst in 0..100u64 {
        let mut r = rng::stream(MASTER_SEED, &[tag("ac1"), inst]);
        let n = r.random_range(20..=200);
        let m = r.random_range(2..=8);
        let reps: Vec<DistanceRep> = (0..m)
            .map(|id| loop {
                let k = r.random_range(2..=5);
                let p = r.random_range(1..=4);
                let betas: Vec<Vec<f64>> =
                    (0..k).map(|_| (0..p).map(|_| r.random_range(-2.0..2.0)).collect()).collect();
                let labels: Vec<usize> = (0..n).map(|_| r.random_range(0..k)).collect();
                let rep =
                    build_distance_rep(id, &font_core::models::ClusterModelParams::kmeans(betas), &labels, euclidean)
                        .expect("valid rep");
                if !rep.degenerate {
                    break rep;
                }
            })
            .collect();
        let g = agreement_matrix(&reps).expect("agreement");
        for a in 0..m {
            for b in 0..m {
                worst = worst.max((g[a][b] - dense_cosine(&reps[a], &reps[b])).abs());
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(worst <= 1e-10 && secs < 30.0, format!("max |G - dense G| = {worst:.2e}, {secs:.1} s"))
}

// ---------------------------------------------------------------- AC2

/// Pair-counting ARI: `2 (n11 n00 - n10 n01) / ((n11 + n10)(n10 + n00) + (n11 + n01)(n01 + n00))`.
fn pair_count_ari(a: &[usize], b: &[usize]) -> Ratio<i128> {
    let (mut n11, mut n10, mut n01, mut n00) = (0i128, 0i128, 0i128, 0i128);
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => n11 += 1,
                (true, false) => n10 += 1,
                (false, true) => n01 += 1,
                (false, false) => n00 += 1,
            }
        }
    }
    let den = (n11 + n10) * (n10 + n00) + (n11 + n01) * (n01 + n00);
    if den == 0 {
        return Ratio::from_integer(1);
    }
    Ratio::new(2 * (n11 * n00 - n10 * n01), den)
}

/// Restricted growth strings of length `n` with at most `k` blocks.
fn partitions(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![0]];
    for _ in 1..n {
        let mut next = Vec::new();
        for p in out {
            let blocks = p.iter().max().unwrap() + 1;
            for l in 0..(blocks + 1).min(k) {
                let mut q = p.clone();
                q.push(l);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

fn ac2() -> Verdict {
    let mut checked = 0usize;
    let mut exact_mismatch = 0usize;
    let mut worst: f64 = 0.0;
    let mut check = |a: &[usize], b: &[usize]| {
        let oracle = pair_count_ari(a, b);
        let exact = adjusted_rand_index_exact(a, b).expect("ari");
        let float = adjusted_rand_index(a, b).expect("ari");
        if exact != oracle {
            exact_mismatch += 1;
        }
        let o = *oracle.numer() as f64 / *oracle.denom() as f64;
        worst = worst.max((float - o).abs());
        checked += 1;
    };
    for n in 2..=8 {
        let parts = partitions(n, 3);
        for a in &parts {
            for b in &parts {
                check(a, b);
            }
        }
    }
    let mut r = rng::stream(MASTER_SEED, &[tag("ac2")]);
    for _ in 0..1000 {
        let n = r.random_range(2..=8);
        let (ka, kb) = (r.random_range(1..=3), r.random_range(1..=3));
        let a: Vec<usize> = (0..n).map(|_| r.random_range(0..ka)).collect();
        let b: Vec<usize> = (0..n).map(|_| r.random_range(0..kb)).collect();
        check(&a, &b);
    }
    verdict(
        exact_mismatch == 0 && worst <= 1e-12,
        format!("{checked} pairs, {exact_mismatch} exact mismatches, max float error {worst:.2e}"),
    )
}

// ------------------------------------------------------------ AC3 to AC5

struct CellRuns {
    ari: std::collections::BTreeMap<Method, Vec<f64>>,
    failures: Vec<String>,
}

fn gaussian_cell(regime: Regime, m: usize, sigma2: f64, methods: &[Method], log: &mut ProtocolLog) -> CellRuns {
    let opts = MethodOptions { methods: methods.to_vec(), k: Some(5), ..Default::default() };
    let outs: Vec<_> = (0..REPLICATES)
        .into_par_iter()
        .map(|rep| {
            let seed = replicate_seed(MASTER_SEED, m, sigma2, rep);
            let sim = SimulationConfig { sites: m, sigma2, regime, seed, ..Default::default() };
            let data = gen_gaussian_sites(&sim).expect("simulation");
            let cell = Cell { setting: regime.as_str().into(), sigma2: Some(sigma2), n_range: Some(sim.n_range) };
            run_replicate(&data.sites, &cell, rep, derive_seed(seed, &[tag("fit")]), &opts)
        })
        .collect();
    let mut runs = CellRuns { ari: Default::default(), failures: Vec::new() };
    for (rep, o) in outs.iter().enumerate() {
        for r in &o.records {
            runs.ari.entry(r.method).or_default().push(r.ari.expect("simulated truth"));
        }
        runs.failures.extend(o.failures.iter().map(|f| format!("{} rep {rep}: {}", f.method, f.error)));
        if let Some(font) = &o.font {
            log.audit(&format!("{} M={m} rep {rep}", regime.as_str()), font);
        }
    }
    runs
}

fn means(runs: &CellRuns) -> std::collections::BTreeMap<Method, f64> {
    runs.ari.iter().map(|(m, v)| (*m, mean(v))).collect()
}

fn ac3(log: &mut ProtocolLog) -> Verdict {
    let start = Instant::now();
    let runs = gaussian_cell(Regime::Homogeneous, 10, 0.05, &[Method::Font, Method::Consensus, Method::Local], log);
    let secs = start.elapsed().as_secs_f64();
    let mu = means(&runs);
    let (f, c, l) = (mu[&Method::Font], mu[&Method::Consensus], mu[&Method::Local]);
    let complete = runs.failures.is_empty() && runs.ari.values().all(|v| v.len() == REPLICATES);
    verdict(
        complete && (f - c).abs() <= 0.03 && f >= l - 0.01 && secs < 300.0,
        format!("FONT {f:.4}, consensus {c:.4}, local {l:.4}, {secs:.1} s, failures {}", runs.failures.len()),
    )
}

fn ac4_ac5(log: &mut ProtocolLog) -> (Verdict, Verdict) {
    let methods = [Method::Font, Method::Consensus, Method::Kfed];
    let imb = gaussian_cell(Regime::Imbalanced, 5, 0.05, &methods, log);
    let con = gaussian_cell(Regime::Contaminated, 5, 0.05, &methods, log);
    let (mi, mc) = (means(&imb), means(&con));
    let complete = |r: &CellRuns| r.failures.is_empty() && r.ari.values().all(|v| v.len() == REPLICATES);

    let (f, c, k) = (mi[&Method::Font], mi[&Method::Consensus], mi[&Method::Kfed]);
    let v4 = verdict(
        complete(&imb) && f >= c + 0.02 && f >= k + 0.02,
        format!("FONT {f:.4}, consensus {c:.4}, kfed {k:.4}, failures {}", imb.failures.len()),
    );
    let (fc, cc, kc) = (mc[&Method::Font], mc[&Method::Consensus], mc[&Method::Kfed]);
    let v5 = verdict(
        complete(&con) && fc >= cc + 0.02 && fc >= kc + 0.02 && f - fc <= 0.05,
        format!(
            "FONT {fc:.4}, consensus {cc:.4}, kfed {kc:.4}; drop vs imbalanced {:.4}, failures {}",
            f - fc,
            con.failures.len()
        ),
    );
    (v4, v5)
}

// ---------------------------------------------------------------- AC6

struct WeightRun {
    cos_true: f64,
    corr: Option<f64>,
}

fn weight_runs(sigma2: f64, log: &mut ProtocolLog) -> Vec<WeightRun> {
    let m = 50;
    let outs: Vec<(FontOutcome, WeightRun)> = (0..REPLICATES)
        .into_par_iter()
        .map(|rep| {
            let seed = replicate_seed(MASTER_SEED, m, sigma2, rep);
            let sim = SimulationConfig { sites: m, sigma2, regime: Regime::Imbalanced, seed, ..Default::default() };
            let data = gen_gaussian_sites(&sim).expect("simulation");
            let cfg = FontConfig {
                k: Some(5),
                fit: FitConfig::default().with_seed(derive_seed(seed, &[tag("fit")])),
                ..Default::default()
            };
            let o = run_font(&data.sites, &cfg).expect("pipeline");
            let truth = stacked_truth(&data.sites).expect("truth");
            let truth_labels: Vec<usize> = truth.iter().map(|t| t.expect("no outliers")).collect();
            let oracle =
                build_distance_rep(usize::MAX, &data.truth.as_ref().expect("truth").params(), &truth_labels, euclidean)
                    .expect("oracle rep");
            let w = cosine_to_reference(&o.reps, &oracle).expect("cosines");
            let wn = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            let cos_true = o.summary.weights.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / wn;
            let corr = font_weight_corr(&o, &truth);
            (o, WeightRun { cos_true, corr })
        })
        .collect();
    outs.into_iter()
        .enumerate()
        .map(|(rep, (o, w))| {
            log.audit(&format!("M=50 sigma2={sigma2} rep {rep}"), &o);
            w
        })
        .collect()
}

fn ac6(log: &mut ProtocolLog) -> Verdict {
    let mut medians = Vec::new();
    let mut cos_hits = 0;
    let mut undefined = 0;
    for (i, sigma2) in [0.05, 0.1, 0.3].into_iter().enumerate() {
        let runs = weight_runs(sigma2, log);
        if i == 0 {
            cos_hits = runs.iter().filter(|r| r.cos_true >= 0.95).count();
        }
        let corrs: Vec<f64> = runs.iter().filter_map(|r| r.corr).collect();
        undefined += runs.len() - corrs.len();
        medians.push(median(&corrs));
    }
    let decreasing = medians.windows(2).all(|w| w[0] > w[1]);
    verdict(
        cos_hits >= 45 && medians[0] >= 0.5 && decreasing,
        format!(
            "cos >= 0.95 in {cos_hits}/50; median corr at sigma2 0.05/0.1/0.3 = {:.3}/{:.3}/{:.3}; undefined corr {undefined}",
            medians[0], medians[1], medians[2]
        ),
    )
}

// ---------------------------------------------------------------- AC7

fn ac7(log: &mut ProtocolLog) -> Verdict {
    let (m, sigma2) = (10, 0.05);
    let outs: Vec<_> = (0..REPLICATES)
        .into_par_iter()
        .map(|rep| {
            let seed = replicate_seed(MASTER_SEED, m, sigma2, rep);
            let sim = SimulationConfig { sites: m, sigma2, seed, ..Default::default() };
            let data = gen_gaussian_sites(&sim).expect("simulation");
            let truth = stacked_truth(&data.sites).expect("truth");
            let fit = FitConfig::default().with_seed(derive_seed(seed, &[tag("fit")]));
            let clean = run_font(&data.sites, &FontConfig { k: Some(5), fit: fit.clone(), ..Default::default() })
                .expect("clean");
            // Two of the ten models, chosen per replicate.
            let mut r = rng::stream(seed, &[tag("ac7")]);
            let mut noisy_ids = rand::seq::index::sample(&mut r, m, m / 5).into_vec();
            noisy_ids.sort_unstable();
            let cfg = FontConfig { k: Some(5), fit, noninformative_models: noisy_ids.clone(), ..Default::default() };
            let noisy = run_font(&data.sites, &cfg).expect("noisy");
            let w = &noisy.summary.weights;
            let (mut wn, mut wi) = (Vec::new(), Vec::new());
            for (j, &x) in w.iter().enumerate() {
                if noisy_ids.contains(&j) {
                    wn.push(x)
                } else {
                    wi.push(x)
                }
            }
            let a_clean = ari_against_truth(&clean.labels, &truth).expect("ari");
            let a_noisy = ari_against_truth(&noisy.labels, &truth).expect("ari");
            (clean, noisy, mean(&wn), mean(&wi), a_clean, a_noisy)
        })
        .collect();
    let mut ratio = Vec::new();
    let (mut clean_ari, mut noisy_ari) = (Vec::new(), Vec::new());
    let (mut wn_all, mut wi_all) = (Vec::new(), Vec::new());
    for (rep, (clean, noisy, wn, wi, ac, an)) in outs.into_iter().enumerate() {
        log.audit(&format!("clean rep {rep}"), &clean);
        log.audit(&format!("noninformative rep {rep}"), &noisy);
        ratio.push(wn / wi);
        wn_all.push(wn);
        wi_all.push(wi);
        clean_ari.push(ac);
        noisy_ari.push(an);
    }
    let (mn, mi) = (mean(&wn_all), mean(&wi_all));
    let drop = mean(&clean_ari) - mean(&noisy_ari);
    verdict(
        mn < 0.5 * mi && drop <= 0.05,
        format!(
            "mean weight noninformative {mn:.4} vs informative {mi:.4} (ratio {:.3}); ARI clean {:.4}, with noise {:.4}",
            mn / mi,
            mean(&clean_ari),
            mean(&noisy_ari)
        ),
    )
}

// ---------------------------------------------------------------- AC8

fn ac8(log: &mut ProtocolLog) -> Verdict {
    let k = 4;
    let outs: Vec<_> = (0..REPLICATES)
        .into_par_iter()
        .map(|rep| {
            let seed = derive_seed(MASTER_SEED, &[tag("ac8"), rep as u64]);
            let sim = MarkovSimConfig { seed, ..Default::default() };
            let data = gen_markov_sites(&sim).expect("simulation");
            let fit = FitConfig::default().with_seed(derive_seed(seed, &[tag("fit")]));
            let cfg = FontConfig {
                k: Some(k),
                fit: fit.clone(),
                pseudo_sites: Some(PseudoSiteConfig::default()),
                ..Default::default()
            };
            let o = run_font(&data.sites, &cfg).expect("pipeline");
            let local = run_local(&data.sites, k, &fit).expect("local");
            let seqs: Vec<_> = data
                .sites
                .iter()
                .map(|s| match s {
                    SiteData::Sequences(d) => d.clone(),
                    SiteData::Vectors(_) => unreachable!(),
                })
                .collect();
            let states = seqs[0].states;
            let n0 = seqs[0].len();

            // FONT labels are shared across sites as is.
            let font_stats: Vec<_> = [(&seqs[0], &o.labels[..n0]), (&seqs[1], &o.labels[n0..])]
                .iter()
                .map(|(d, l)| empirical_markov_stats(d, l, k, states).expect("stats"))
                .collect();
            let font_div = transition_divergence(&font_stats[0], &font_stats[1]).expect("divergence").mean_frob_t;

            // Local clusters: align site 2's components to site 1's by parameter distance.
            let fit_a = markov_mixture_fit(&seqs[0], k, &font_core::benchmarks::site_fit_config(&fit, seqs[0].site_id))
                .expect("fit");
            let fit_b = markov_mixture_fit(&seqs[1], k, &font_core::benchmarks::site_fit_config(&fit, seqs[1].site_id))
                .expect("fit");
            assert_eq!(fit_a.labels[..], local.labels[..n0]);
            let cost: Vec<Vec<f64>> = fit_a
                .params
                .betas
                .iter()
                .map(|a| fit_b.params.betas.iter().map(|b| euclidean(a, b)).collect())
                .collect();
            let assignment = hungarian(&cost); // site-1 component a -> site-2 component assignment[a]
            let mut to_a = vec![0; k];
            for (a, &b) in assignment.iter().enumerate() {
                to_a[b] = a;
            }
            let labels_b: Vec<usize> = fit_b.labels.iter().map(|&b| to_a[b]).collect();
            let sa = empirical_markov_stats(&seqs[0], &fit_a.labels, k, states).expect("stats");
            let sb = empirical_markov_stats(&seqs[1], &labels_b, k, states).expect("stats");
            let local_div = transition_divergence(&sa, &sb).expect("divergence").mean_frob_t;
            (o, font_div, local_div)
        })
        .collect();
    let mut wins = 0;
    let (mut fd, mut ld) = (Vec::new(), Vec::new());
    for (rep, (o, f, l)) in outs.into_iter().enumerate() {
        log.audit(&format!("markov rep {rep}"), &o);
        if o.summary.models.len() != 8 {
            log.violations.push(format!("markov rep {rep}: {} models", o.summary.models.len()));
        }
        if f <= l {
            wins += 1;
        }
        fd.push(f);
        ld.push(l);
    }
    verdict(
        wins >= 40,
        format!("FONT <= local in {wins}/50; mean divergence FONT {:.3}, local {:.3}", mean(&fd), mean(&ld)),
    )
}

// ---------------------------------------------------------------- AC9

fn ac9(log: &ProtocolLog) -> Verdict {
    // JSON round-trip against in-process on both data kinds.
    let mut mismatches = 0;
    let mut checked = 0;
    for rep in 0..10 {
        let seed = replicate_seed(MASTER_SEED, 10, 0.05, rep);
        let sim = SimulationConfig { sites: 10, seed, regime: Regime::Contaminated, ..Default::default() };
        let g = gen_gaussian_sites(&sim).expect("simulation").sites;
        let mk = MarkovSimConfig { seed, ..Default::default() };
        let s = gen_markov_sites(&mk).expect("simulation").sites;
        for (sites, cfg) in [
            (&g, FontConfig { k: Some(5), ..Default::default() }),
            (&s, FontConfig { k: Some(4), pseudo_sites: Some(PseudoSiteConfig::default()), ..Default::default() }),
        ] {
            let cfg = FontConfig { fit: FitConfig::default().with_seed(seed), ..cfg };
            let a = run_font(sites, &cfg).expect("in-process");
            let b = run_font(sites, &FontConfig { transport: Transport::Json, ..cfg }).expect("json");
            if a.labels != b.labels || a.summary.weights != b.summary.weights {
                mismatches += 1;
            }
            checked += 1;
        }
    }
    verdict(
        log.violations.is_empty() && mismatches == 0,
        format!(
            "{} audited runs, {} violations; JSON vs in-process: {mismatches}/{checked} differ{}",
            log.runs,
            log.violations.len(),
            log.violations.first().map(|v| format!(" (first: {v})")).unwrap_or_default()
        ),
    )
}

// ---------------------------------------------------------------- AC10

/// Relative slack on the k-means objective for floating-point reassociation.
const OBJECTIVE_SLACK: f64 = 1e-12;
/// Absolute slack on the EM log-likelihood.
const LOG_LIKELIHOOD_SLACK: f64 = 1e-8;

fn ac10() -> Verdict {
    let mut steps = 0usize;
    let mut bad = Vec::new();
    for seed in 0..10u64 {
        for regime in [Regime::Homogeneous, Regime::Imbalanced, Regime::Contaminated] {
            let sim = SimulationConfig { sites: 3, regime, sigma2: 0.3, seed, ..Default::default() };
            for site in gen_gaussian_sites(&sim).expect("simulation").sites {
                let SiteData::Vectors(d) = &site else { unreachable!() };
                for k in [2, 5, 8] {
                    let fit = kmeans_fit(d, k, &FitConfig::default().with_seed(seed)).expect("fit");
                    for h in &fit.histories {
                        for w in h.windows(2) {
                            steps += 1;
                            if w[1] > w[0] + OBJECTIVE_SLACK * w[0].abs() {
                                bad.push(format!("kmeans objective {} -> {}", w[0], w[1]));
                            }
                        }
                    }
                }
            }
        }
        let mk = MarkovSimConfig { seed, n_range: (100, 200), ..Default::default() };
        for site in gen_markov_sites(&mk).expect("simulation").sites {
            let SiteData::Sequences(d) = &site else { unreachable!() };
            for k in [2, 4] {
                let fit = markov_mixture_fit(d, k, &FitConfig::default().with_seed(seed)).expect("fit");
                assert_eq!(fit.params.kind, ModelKind::MarkovMixture);
                for h in &fit.histories {
                    for w in h.windows(2) {
                        steps += 1;
                        if w[1] < w[0] - LOG_LIKELIHOOD_SLACK {
                            bad.push(format!("EM log-likelihood {} -> {}", w[0], w[1]));
                        }
                    }
                }
            }
        }
    }
    verdict(
        bad.is_empty(),
        format!(
            "{steps} iterations checked, {} violations{}",
            bad.len(),
            bad.first().map(|b| format!(" (first: {b})")).unwrap_or_default()
        ),
    )
}

fn report(name: &str, v: &Verdict) -> bool {
    println!("{} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
    v.pass
}

fn main() -> ExitCode {
    let mut log = ProtocolLog::default();
    let mut results = Vec::new();
    results.push(report("AC1 agreement matrix equals dense oracle", &ac1()));
    results.push(report("AC2 ARI equals pair-counting oracle", &ac2()));
    results.push(report("AC3 homogeneous: FONT matches consensus and local", &ac3(&mut log)));
    let (v4, v5) = ac4_ac5(&mut log);
    results.push(report("AC4 imbalanced: FONT beats consensus and K-fed", &v4));
    results.push(report("AC5 contaminated: FONT beats comparators, degrades <= 0.05", &v5));
    results.push(report("AC6 weights track true cosines and local accuracy", &ac6(&mut log)));
    results.push(report("AC7 random-label models are down-weighted", &ac7(&mut log)));
    results.push(report("AC8 Markov pipeline: FONT strata agree better across sites", &ac8(&mut log)));
    results.push(report("AC9 protocol: schema, message count, JSON round trip", &ac9(&log)));
    results.push(report("AC10 monotone k-means objective and EM likelihood", &ac10()));

    let passed = results.iter().filter(|&&p| p).count();
    println!("{passed} of {} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
