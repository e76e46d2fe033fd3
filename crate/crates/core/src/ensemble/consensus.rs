//! Weighted consensus distance and the final clustering on it.
//!
//! Subjects with identical label profiles across the contributing models have
//! identical rows in the consensus matrix, so everything is stored per
//! distinct profile. For clustering, row `p` of the consensus matrix is
//! `phi_p^T Psi`, where `phi_p` stacks each model's scaled table row and `Psi`
//! stacks one-hot label indicators. Squared distances between rows (weighted
//! by profile multiplicity) are then `(phi_p - phi_q)^T H (phi_p - phi_q)` with
//! `H` the stacked label contingency table, so k-means runs exactly in the
//! factored space `H^{1/2} phi`, whose dimension is the total cluster count.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::rep::DistanceRep;
use crate::error::{FontError, Result};
use crate::linalg::sym_eigen_desc;
use crate::models::{weighted_kmeans, FitConfig};

pub const DENSE_EXPORT_MAX: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusDistance {
    /// Indices (into the input reps) of models with nonzero weight.
    pub models: Vec<usize>,
    /// Renormalized weight divided by Frobenius norm, per contributing model.
    pub coefs: Vec<f64>,
    pub tables: Vec<Vec<Vec<f64>>>,
    /// Distinct label tuples over the contributing models, in order of first appearance.
    pub profiles: Vec<Vec<usize>>,
    pub multiplicity: Vec<usize>,
    pub subject_index: Vec<usize>,
}

impl ConsensusDistance {
    pub fn n(&self) -> usize {
        self.subject_index.len()
    }

    pub fn n_profiles(&self) -> usize {
        self.profiles.len()
    }

    /// Consensus distance between profiles `p` and `q`.
    pub fn entry(&self, p: usize, q: usize) -> f64 {
        let (a, b) = (&self.profiles[p], &self.profiles[q]);
        let mut v = 0.0;
        for (m, (c, t)) in self.coefs.iter().zip(&self.tables).enumerate() {
            v += c * t[a[m]][b[m]];
        }
        v
    }

    /// Profile-by-profile matrix.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        let p = self.n_profiles();
        (0..p).map(|i| (0..p).map(|j| self.entry(i, j)).collect()).collect()
    }

    /// Subject-by-subject matrix.
    pub fn dense(&self) -> Vec<Vec<f64>> {
        let rows = self.rows();
        self.subject_index.iter().map(|&pi| self.subject_index.iter().map(|&pj| rows[pi][pj]).collect()).collect()
    }

    /// Writes the subject-by-subject matrix as CSV (no header).
    pub fn write_dense_csv(&self, path: &Path) -> Result<()> {
        if self.n() > DENSE_EXPORT_MAX {
            return Err(FontError::ConfigInvalid(format!(
                "dense export limited to {DENSE_EXPORT_MAX} subjects, have {}",
                self.n()
            )));
        }
        let rows = self.rows();
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        for &pi in &self.subject_index {
            let line: Vec<String> = self.subject_index.iter().map(|&pj| format!("{}", rows[pi][pj])).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Weighted sum of Frobenius-normalized distance matrices. Degenerate reps get
/// zero weight and the remaining weights are rescaled to unit norm.
pub fn ensemble_distance(reps: &[DistanceRep], weights: &[f64]) -> Result<ConsensusDistance> {
    if reps.len() != weights.len() {
        return Err(FontError::LengthMismatch { a: reps.len(), b: weights.len() });
    }
    if weights.iter().any(|&w| !(w.is_finite() && w >= 0.0)) {
        return Err(FontError::ConfigInvalid("weights must be finite and nonnegative".into()));
    }
    let n = reps.first().map_or(0, DistanceRep::n);
    if let Some(r) = reps.iter().find(|r| r.n() != n) {
        return Err(FontError::SubjectCountMismatch { a: n, b: r.n() });
    }
    let models: Vec<usize> = (0..reps.len()).filter(|&m| !reps[m].degenerate && weights[m] > 0.0).collect();
    if models.is_empty() {
        return Err(FontError::AllDegenerate);
    }
    let norm = models.iter().map(|&m| weights[m] * weights[m]).sum::<f64>().sqrt();
    let coefs = models.iter().map(|&m| weights[m] / norm / reps[m].frob_norm).collect();
    let tables = models.iter().map(|&m| reps[m].table.clone()).collect();

    let mut lookup: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut profiles = Vec::new();
    let mut multiplicity = Vec::new();
    let mut subject_index = Vec::with_capacity(n);
    for i in 0..n {
        let profile: Vec<usize> = models.iter().map(|&m| reps[m].labels[i]).collect();
        let idx = *lookup.entry(profile.clone()).or_insert_with(|| {
            profiles.push(profile);
            multiplicity.push(0);
            profiles.len() - 1
        });
        multiplicity[idx] += 1;
        subject_index.push(idx);
    }
    Ok(ConsensusDistance { models, coefs, tables, profiles, multiplicity, subject_index })
}

#[derive(Debug, Clone)]
pub struct FinalClustering {
    pub labels: Vec<usize>,
    /// Weighted k-means objective in consensus-row space.
    pub objective: f64,
    pub empty_clusters: usize,
}

/// Feature vectors whose Euclidean geometry (with profile multiplicities as
/// item weights) matches that of the consensus rows.
pub fn profile_embedding(cd: &ConsensusDistance) -> Vec<Vec<f64>> {
    let offsets: Vec<usize> = cd
        .tables
        .iter()
        .scan(0, |acc, t| {
            let o = *acc;
            *acc += t.len();
            Some(o)
        })
        .collect();
    let dim: usize = cd.tables.iter().map(Vec::len).sum();

    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for (profile, &mult) in cd.profiles.iter().zip(&cd.multiplicity) {
        let idx: Vec<usize> = profile.iter().zip(&offsets).map(|(l, o)| l + o).collect();
        for &a in &idx {
            for &b in &idx {
                h[(a, b)] += mult as f64;
            }
        }
    }
    let (values, vectors) = sym_eigen_desc(&h);
    let cutoff = values.first().copied().unwrap_or(0.0).max(0.0) * 1e-12;
    let basis: Vec<(f64, &Vec<f64>)> =
        values.iter().zip(&vectors).filter(|(&v, _)| v > cutoff).map(|(&v, q)| (v.sqrt(), q)).collect();

    cd.profiles
        .iter()
        .map(|profile| {
            let mut phi = vec![0.0; dim];
            for (m, &l) in profile.iter().enumerate() {
                let row = &cd.tables[m][l];
                for (j, &d) in row.iter().enumerate() {
                    phi[offsets[m] + j] = cd.coefs[m] * d;
                }
            }
            basis.iter().map(|(s, q)| s * q.iter().zip(&phi).map(|(a, b)| a * b).sum::<f64>()).collect()
        })
        .collect()
}

/// k-means with `k` clusters on the consensus rows, one item per distinct
/// profile weighted by its multiplicity; labels are mapped back to subjects.
pub fn final_cluster(cd: &ConsensusDistance, k: usize, cfg: &FitConfig) -> Result<FinalClustering> {
    if k < 2 {
        return Err(FontError::ConfigInvalid("final clustering needs k >= 2".into()));
    }
    let points = profile_embedding(cd);
    let weights: Vec<f64> = cd.multiplicity.iter().map(|&m| m as f64).collect();
    let fit = weighted_kmeans(&points, &weights, k, cfg)?;
    if fit.empty_clusters > 0 {
        log::warn!("{} of {k} final clusters are empty ({} distinct profiles)", fit.empty_clusters, cd.n_profiles());
    }
    Ok(FinalClustering {
        labels: cd.subject_index.iter().map(|&p| fit.labels[p]).collect(),
        objective: fit.objective,
        empty_clusters: fit.empty_clusters,
    })
}

#[cfg(test)]
mod tests {
    use super::super::rep::{build_distance_rep, euclidean};
    use super::*;
    use crate::metrics::adjusted_rand_index;
    use crate::models::{sq_dist, ClusterModelParams};
    use crate::rng;
    use rand::Rng;

    fn random_rep<R: Rng>(id: usize, n: usize, k: usize, r: &mut R) -> DistanceRep {
        let betas = (0..k).map(|_| (0..3).map(|_| r.random_range(-3.0..3.0)).collect()).collect();
        let labels: Vec<usize> = (0..n).map(|_| r.random_range(0..k)).collect();
        build_distance_rep(id, &ClusterModelParams::kmeans(betas), &labels, euclidean).unwrap()
    }

    #[test]
    fn single_model_is_normalized_matrix() {
        let params = ClusterModelParams::kmeans(vec![vec![0.0, 0.0], vec![3.0, 4.0]]);
        let rep = build_distance_rep(0, &params, &[0, 1, 0], euclidean).unwrap();
        let cd = ensemble_distance(std::slice::from_ref(&rep), &[1.0]).unwrap();
        let dense = cd.dense();
        for (a, b) in dense.iter().flatten().zip(rep.dense().iter().flatten()) {
            assert!((a - b / 10.0).abs() < 1e-15);
        }
        assert_eq!(cd.n_profiles(), 2);
    }

    #[test]
    fn duplicated_model_scales_by_sqrt_two() {
        let mut r = rng::stream(2, &[]);
        let rep = random_rep(0, 12, 3, &mut r);
        let w = 1.0 / 2f64.sqrt();
        let cd = ensemble_distance(&[rep.clone(), rep.clone()], &[w, w]).unwrap();
        for (a, b) in cd.dense().iter().flatten().zip(rep.dense().iter().flatten()) {
            assert!((a - 2f64.sqrt() * b / rep.frob_norm).abs() < 1e-12);
        }
    }

    #[test]
    fn compressed_matches_dense_sum() {
        let mut r = rng::stream(3, &[]);
        let reps: Vec<DistanceRep> = (0..5).map(|m| random_rep(m, 40, 2 + m % 3, &mut r)).collect();
        let raw: Vec<f64> = (0..5).map(|_| r.random_range(0.1..1.0)).collect();
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        let w: Vec<f64> = raw.iter().map(|x| x / norm).collect();
        let cd = ensemble_distance(&reps, &w).unwrap();
        let dense = cd.dense();
        for i in 0..40 {
            for j in 0..40 {
                let expect: f64 = reps.iter().zip(&w).map(|(rep, wm)| wm * rep.entry(i, j) / rep.frob_norm).sum();
                assert!((dense[i][j] - expect).abs() < 1e-12);
                if cd.subject_index[i] == cd.subject_index[j] {
                    assert_eq!(dense[i][j], 0.0);
                }
                assert_eq!(dense[i][j], dense[j][i]);
            }
        }
    }

    #[test]
    fn degenerate_reps_dropped_and_renormalized() {
        let mut r = rng::stream(4, &[]);
        let good = random_rep(0, 10, 3, &mut r);
        let params = ClusterModelParams::kmeans(vec![vec![0.0], vec![1.0]]);
        let bad = build_distance_rep(1, &params, &[0; 10], euclidean).unwrap();
        let cd = ensemble_distance(&[good.clone(), bad.clone()], &[0.6, 0.8]).unwrap();
        assert_eq!(cd.models, vec![0]);
        assert!((cd.coefs[0] - 1.0 / good.frob_norm).abs() < 1e-15);
        assert!(matches!(ensemble_distance(&[bad], &[1.0]), Err(FontError::AllDegenerate)));
    }

    #[test]
    fn k_distinct_profiles_each_own_cluster() {
        let params = ClusterModelParams::kmeans(vec![vec![0.0], vec![4.0], vec![9.0]]);
        let labels = vec![0, 1, 2, 0, 1, 2, 2];
        let rep = build_distance_rep(0, &params, &labels, euclidean).unwrap();
        let cd = ensemble_distance(&[rep], &[1.0]).unwrap();
        let fit = final_cluster(&cd, 3, &FitConfig::default()).unwrap();
        assert_eq!(adjusted_rand_index(&fit.labels, &labels).unwrap(), 1.0);
        assert!(fit.objective.abs() < 1e-20);
    }

    #[test]
    fn one_profile_leaves_empty_cluster() {
        let params = ClusterModelParams::kmeans(vec![vec![0.0], vec![4.0]]);
        let a = build_distance_rep(0, &params, &[0, 1, 0, 1], euclidean).unwrap();
        let cd = ensemble_distance(&[a], &[1.0]).unwrap();
        // collapse to one profile by construction
        let collapsed = ConsensusDistance {
            profiles: vec![cd.profiles[0].clone()],
            multiplicity: vec![4],
            subject_index: vec![0; 4],
            ..cd
        };
        let fit = final_cluster(&collapsed, 2, &FitConfig::default()).unwrap();
        assert_eq!(fit.labels, vec![0; 4]);
        assert_eq!(fit.empty_clusters, 1);
    }

    #[test]
    fn embedding_preserves_weighted_row_distances() {
        let mut r = rng::stream(5, &[]);
        let reps: Vec<DistanceRep> = (0..4).map(|m| random_rep(m, 30, 3, &mut r)).collect();
        let cd = ensemble_distance(&reps, &[0.5; 4]).unwrap();
        let z = profile_embedding(&cd);
        let dense = cd.dense();
        let rows = cd.rows();
        for p in 0..cd.n_profiles() {
            for q in 0..cd.n_profiles() {
                // squared distance between the corresponding dense subject rows
                let (i, j) = (
                    cd.subject_index.iter().position(|&x| x == p).unwrap(),
                    cd.subject_index.iter().position(|&x| x == q).unwrap(),
                );
                let expect: f64 = (0..30).map(|c| (dense[i][c] - dense[j][c]).powi(2)).sum();
                assert!((sq_dist(&z[p], &z[q]) - expect).abs() < 1e-9 * expect.max(1.0));
                assert_eq!(rows[p][q], dense[i][j]);
            }
        }
    }

    #[test]
    fn dense_export_roundtrip() {
        let mut r = rng::stream(6, &[]);
        let rep = random_rep(0, 6, 2, &mut r);
        let cd = ensemble_distance(&[rep], &[1.0]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        cd.write_dense_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let parsed: Vec<Vec<f64>> = text.lines().map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
        assert_eq!(parsed, cd.dense());
    }
}
