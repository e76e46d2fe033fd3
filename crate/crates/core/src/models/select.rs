use serde::{Deserialize, Serialize};

use super::params::FitConfig;
use super::{fit_local, LocalFit};
use crate::data::SiteData;
use crate::error::{FontError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    #[default]
    Bic,
    Aic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KSelection {
    pub k: usize,
    /// `(k, criterion value)` for every candidate, lower is better.
    pub scores: Vec<(usize, f64)>,
}

/// Free-parameter count of a fitted local model.
pub fn parameter_count(data: &SiteData, k: usize) -> usize {
    match data {
        SiteData::Vectors(d) => k * d.dim() + 1 + (k - 1),
        SiteData::Sequences(d) => {
            let s = d.states;
            k * (s - 1) + k * s * (s - 1) + (k - 1)
        }
    }
}

/// Log-likelihood used by the information criteria. k-means is scored as a
/// hard-assignment spherical Gaussian mixture with one pooled variance.
pub fn fit_log_likelihood(data: &SiteData, fit: &LocalFit) -> f64 {
    match (data, fit) {
        (SiteData::Vectors(d), LocalFit::Kmeans(f)) => {
            let n = d.len() as f64;
            let p = d.dim() as f64;
            let mut counts = vec![0usize; f.params.k()];
            for &l in &f.labels {
                counts[l] += 1;
            }
            let mixing: f64 = counts.iter().filter(|&&c| c > 0).map(|&c| c as f64 * (c as f64 / n).ln()).sum();
            let var = (f.objective / (n * p)).max(f64::MIN_POSITIVE);
            mixing - 0.5 * n * p * ((2.0 * std::f64::consts::PI * var).ln() + 1.0)
        }
        (_, LocalFit::Markov(f)) => f.log_likelihood,
        (SiteData::Sequences(_), LocalFit::Kmeans(_)) => unreachable!("fit_local pairs data and model kinds"),
    }
}

/// Fits every candidate `k` and returns the one minimizing the criterion
/// (ties go to the smaller `k`).
pub fn select_k_local(data: &SiteData, k_range: &[usize], criterion: Criterion, cfg: &FitConfig) -> Result<KSelection> {
    if k_range.is_empty() {
        return Err(FontError::ConfigInvalid("empty k range".into()));
    }
    let n = data.len() as f64;
    let mut scores = Vec::with_capacity(k_range.len());
    for &k in k_range {
        let fit = fit_local(data, k, cfg)?;
        let ll = fit_log_likelihood(data, &fit);
        let d = parameter_count(data, k) as f64;
        let penalty = match criterion {
            Criterion::Bic => d * n.ln(),
            Criterion::Aic => 2.0 * d,
        };
        scores.push((k, -2.0 * ll + penalty));
    }
    let mut best = scores[0];
    for &s in &scores[1..] {
        if s.1 < best.1 || (s.1 == best.1 && s.0 < best.0) {
            best = s;
        }
    }
    Ok(KSelection { k: best.0, scores })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{SequenceDataset, VectorDataset};
    use crate::rng;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn singleton_range() {
        let rows = (0..20).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let data = SiteData::Vectors(VectorDataset::new(0, rows));
        assert_eq!(select_k_local(&data, &[3], Criterion::Bic, &FitConfig::default()).unwrap().k, 3);
        assert!(select_k_local(&data, &[], Criterion::Bic, &FitConfig::default()).is_err());
    }

    #[test]
    fn four_gaussian_components() {
        let mut r = rng::stream(40, &[]);
        let noise = Normal::new(0.0, 0.05f64.sqrt()).unwrap();
        let mus: Vec<Vec<f64>> =
            (0..4).map(|_| (0..10).map(|_| if r.random::<bool>() { 1.0 } else { -1.0 }).collect()).collect();
        // distinct centers are at least 2 apart in one coordinate, noise sd ~0.22
        for a in 0..4 {
            for b in 0..a {
                assert_ne!(mus[a], mus[b]);
            }
        }
        let rows: Vec<Vec<f64>> =
            (0..200).map(|i| mus[i % 4].iter().map(|m| m + noise.sample(&mut r)).collect()).collect();
        let data = SiteData::Vectors(VectorDataset::new(0, rows));
        let sel = select_k_local(&data, &[2, 3, 4, 5, 6], Criterion::Bic, &FitConfig::default()).unwrap();
        assert_eq!(sel.k, 4, "{:?}", sel.scores);
    }

    #[test]
    fn single_markov_component() {
        let mut r = rng::stream(41, &[]);
        let t = [[0.7, 0.2, 0.1], [0.1, 0.8, 0.1], [0.3, 0.3, 0.4]];
        let seqs: Vec<Vec<usize>> = (0..150)
            .map(|_| {
                let mut s = vec![r.random_range(0..3)];
                for _ in 1..16 {
                    let row = t[*s.last().unwrap()];
                    let x: f64 = r.random();
                    s.push(if x < row[0] {
                        0
                    } else if x < row[0] + row[1] {
                        1
                    } else {
                        2
                    });
                }
                s
            })
            .collect();
        let data = SiteData::Sequences(SequenceDataset::new(0, 3, seqs));
        let sel = select_k_local(&data, &[1, 2, 3, 4], Criterion::Bic, &FitConfig::default()).unwrap();
        assert_eq!(sel.k, 1, "{:?}", sel.scores);
        let gap = sel.scores[1].1 - sel.scores[0].1;
        assert!(gap > 0.0);
    }
}
