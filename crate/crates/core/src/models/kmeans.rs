//! Lloyd's k-means with k-means++ seeding and per-item weights.

use rand::Rng;
use rayon::prelude::*;

use super::params::{ClusterModelParams, FitConfig, ModelKind};
use crate::data::VectorDataset;
use crate::error::{FontError, Result};
use crate::rng;

/// Outcome of a k-means fit: the best restart plus the objective trace of
/// every restart.
#[derive(Debug, Clone)]
pub struct KmeansFit {
    pub params: ClusterModelParams,
    pub labels: Vec<usize>,
    /// Weighted sum of squared distances to assigned centers.
    pub objective: f64,
    pub best_restart: usize,
    /// Objective after each assignment step, one trace per restart.
    pub histories: Vec<Vec<f64>>,
    /// Clusters left without members (only possible with fewer distinct items than k).
    pub empty_clusters: usize,
}

#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index and squared distance of the nearest center; ties go to the smaller index.
#[inline]
pub fn nearest(centers: &[Vec<f64>], x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (k, c) in centers.iter().enumerate() {
        let d = sq_dist(c, x);
        if d < best.1 {
            best = (k, d);
        }
    }
    best
}

/// Assigns `x` to the cluster whose center is closest in squared Euclidean distance.
pub fn kmeans_assign(params: &ClusterModelParams, x: &[f64]) -> Result<usize> {
    if params.kind != ModelKind::Kmeans {
        return Err(FontError::KindMismatch { expected: "kmeans", got: params.kind.as_str() });
    }
    if x.len() != params.dim() {
        return Err(FontError::DimensionMismatch { expected: params.dim(), got: x.len() });
    }
    Ok(nearest(&params.betas, x).0)
}

pub fn kmeans_fit(data: &VectorDataset, k: usize, cfg: &FitConfig) -> Result<KmeansFit> {
    data.validate()?;
    kmeans_fit_rows(&data.rows, k, cfg)
}

/// Unweighted k-means on raw rows. Requires at least `k` rows.
pub fn kmeans_fit_rows(rows: &[Vec<f64>], k: usize, cfg: &FitConfig) -> Result<KmeansFit> {
    if rows.len() < k {
        return Err(FontError::TooFewPoints { n: rows.len(), k });
    }
    let weights = vec![1.0; rows.len()];
    weighted_kmeans(rows, &weights, k, cfg)
}

/// k-means where item `i` counts `weights[i]` times. Items are never split, so
/// with fewer items than `k` some clusters stay empty (reported in the fit).
pub fn weighted_kmeans(points: &[Vec<f64>], weights: &[f64], k: usize, cfg: &FitConfig) -> Result<KmeansFit> {
    cfg.validate()?;
    if k == 0 {
        return Err(FontError::ConfigInvalid("k must be positive".into()));
    }
    if points.is_empty() {
        return Err(FontError::TooFewPoints { n: 0, k });
    }
    if weights.len() != points.len() {
        return Err(FontError::LengthMismatch { a: weights.len(), b: points.len() });
    }
    let dim = points[0].len();
    for p in points {
        if p.len() != dim {
            return Err(FontError::DimensionMismatch { expected: dim, got: p.len() });
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(FontError::NonFinite);
        }
    }
    if weights.iter().any(|&w| !(w.is_finite() && w > 0.0)) {
        return Err(FontError::ConfigInvalid("item weights must be positive and finite".into()));
    }

    let runs: Vec<Lloyd> = (0..cfg.restarts).into_par_iter().map(|r| run_restart(points, weights, k, cfg, r)).collect();

    let mut best = 0;
    for (r, run) in runs.iter().enumerate() {
        if run.objective < runs[best].objective {
            best = r;
        }
    }
    let histories = runs.iter().map(|r| r.history.clone()).collect();
    let chosen = runs.into_iter().nth(best).expect("at least one restart");
    let mut counts = vec![0usize; k];
    for &l in &chosen.labels {
        counts[l] += 1;
    }
    Ok(KmeansFit {
        params: ClusterModelParams::kmeans(chosen.centers),
        labels: chosen.labels,
        objective: chosen.objective,
        best_restart: best,
        histories,
        empty_clusters: counts.iter().filter(|&&c| c == 0).count(),
    })
}

struct Lloyd {
    centers: Vec<Vec<f64>>,
    labels: Vec<usize>,
    objective: f64,
    history: Vec<f64>,
}

fn run_restart(points: &[Vec<f64>], weights: &[f64], k: usize, cfg: &FitConfig, restart: usize) -> Lloyd {
    let mut rng = rng::stream(cfg.seed, &[rng::tag("kmeans"), restart as u64]);
    let mut centers = plus_plus(points, weights, k, &mut rng);
    let n = points.len();
    let mut labels = vec![usize::MAX; n];
    let mut dists = vec![0.0; n];
    let mut history = Vec::new();
    let mut prev_labels: Vec<usize>;

    for iter in 0..cfg.max_iter {
        prev_labels = std::mem::take(&mut labels);
        labels = Vec::with_capacity(n);
        for (i, p) in points.iter().enumerate() {
            let (l, d) = nearest(&centers, p);
            labels.push(l);
            dists[i] = d;
        }
        refill_empty(points, k, &mut centers, &mut labels, &mut dists);

        let objective: f64 = dists.iter().zip(weights).map(|(d, w)| d * w).sum();
        let converged = match history.last() {
            Some(&prev) => labels == prev_labels || prev - objective <= cfg.tol * prev,
            None => false,
        };
        history.push(objective);
        if converged {
            break;
        }
        if iter + 1 < cfg.max_iter {
            update_centers(points, weights, &labels, &mut centers);
        }
    }

    // Report labels that the returned centers reproduce exactly.
    let mut objective = 0.0;
    for (i, p) in points.iter().enumerate() {
        let (l, d) = nearest(&centers, p);
        labels[i] = l;
        objective += d * weights[i];
    }
    Lloyd { centers, labels, objective, history }
}

fn plus_plus<R: Rng>(points: &[Vec<f64>], weights: &[f64], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let total_w: f64 = weights.iter().sum();
    let first = sample_index(weights, total_w, rng);
    let mut centers = vec![points[first].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let scores: Vec<f64> = d2.iter().zip(weights).map(|(d, w)| d * w).collect();
        let total: f64 = scores.iter().sum();
        let next = if total > 0.0 { sample_index(&scores, total, rng) } else { sample_index(weights, total_w, rng) };
        let c = points[next].clone();
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &c));
        }
        centers.push(c);
    }
    centers
}

fn sample_index<R: Rng>(scores: &[f64], total: f64, rng: &mut R) -> usize {
    let mut target = rng.random::<f64>() * total;
    for (i, &s) in scores.iter().enumerate() {
        if target < s {
            return i;
        }
        target -= s;
    }
    scores.iter().rposition(|&s| s > 0.0).unwrap_or(0)
}

/// Moves the item farthest from its center into each empty cluster, taking
/// only from clusters that keep at least one other item.
fn refill_empty(points: &[Vec<f64>], k: usize, centers: &mut [Vec<f64>], labels: &mut [usize], dists: &mut [f64]) {
    let mut counts = vec![0usize; k];
    for &l in labels.iter() {
        counts[l] += 1;
    }
    for j in 0..k {
        if counts[j] > 0 {
            continue;
        }
        let donor =
            (0..points.len()).filter(|&i| counts[labels[i]] > 1).fold(None, |best: Option<usize>, i| match best {
                Some(b) if dists[b] >= dists[i] => Some(b),
                _ => Some(i),
            });
        let Some(i) = donor else { continue };
        counts[labels[i]] -= 1;
        counts[j] = 1;
        labels[i] = j;
        dists[i] = 0.0;
        centers[j] = points[i].clone();
    }
}

fn update_centers(points: &[Vec<f64>], weights: &[f64], labels: &[usize], centers: &mut [Vec<f64>]) {
    let dim = points[0].len();
    let k = centers.len();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut mass = vec![0.0; k];
    for ((p, &w), &l) in points.iter().zip(weights).zip(labels) {
        mass[l] += w;
        for (s, v) in sums[l].iter_mut().zip(p) {
            *s += w * v;
        }
    }
    for ((c, s), m) in centers.iter_mut().zip(sums).zip(mass) {
        if m > 0.0 {
            *c = s.into_iter().map(|v| v / m).collect();
        }
    }
}
