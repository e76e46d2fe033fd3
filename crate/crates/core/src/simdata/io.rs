//! One CSV per site plus a `manifest.json` describing the study.
//!
//! Vector sites: columns `x1..xp,true_label,is_outlier`. Sequence sites:
//! columns `seq,true_label,is_outlier` with the sequence written as
//! space-separated states. Labels and states are one-based on disk; an empty
//! `true_label` marks a subject without a cluster.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{GroundTruth, MultiSiteDataset};
use crate::data::{SequenceDataset, SiteData, VectorDataset};
use crate::error::{FontError, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteFileEntry {
    pub site_id: usize,
    pub file: String,
    pub subjects: usize,
    pub outliers: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    /// `vectors` or `sequences`.
    pub kind: String,
    pub seed: u64,
    pub config: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<usize>,
    pub sites: Vec<SiteFileEntry>,
    pub contaminated_sites: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<GroundTruth>,
    #[serde(default)]
    pub notes: Vec<String>,
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn site_csv(site: &SiteData) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let label = |t: Option<&[Option<usize>]>, i: usize| match t.and_then(|t| t[i]) {
        Some(l) => (l + 1).to_string(),
        None => String::new(),
    };
    match site {
        SiteData::Vectors(d) => {
            let mut header: Vec<String> = (1..=d.dim()).map(|j| format!("x{j}")).collect();
            header.extend(["true_label".to_string(), "is_outlier".to_string()]);
            w.write_record(&header)?;
            for (i, row) in d.rows.iter().enumerate() {
                let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                rec.push(label(d.true_labels.as_deref(), i));
                rec.push(u8::from(d.outliers[i]).to_string());
                w.write_record(&rec)?;
            }
        }
        SiteData::Sequences(d) => {
            w.write_record(["seq", "true_label", "is_outlier"])?;
            for (i, seq) in d.sequences.iter().enumerate() {
                let s: Vec<String> = seq.iter().map(|x| (x + 1).to_string()).collect();
                w.write_record([s.join(" "), label(d.true_labels.as_deref(), i), "0".to_string()])?;
            }
        }
    }
    w.into_inner().map_err(|e| FontError::Io(e.into_error()))
}

/// Writes every site file and the manifest into `dir` (created if missing).
pub fn write_dataset(dir: &Path, data: &MultiSiteDataset, config: serde_json::Value) -> Result<Manifest> {
    fs::create_dir_all(dir)?;
    let mut entries = Vec::new();
    for site in &data.sites {
        let bytes = site_csv(site)?;
        let file = format!("site_{}.csv", site.site_id());
        write_atomic(&dir.join(&file), &bytes)?;
        let outliers = match site {
            SiteData::Vectors(d) => d.outliers.iter().filter(|&&o| o).count(),
            SiteData::Sequences(_) => 0,
        };
        entries.push(SiteFileEntry {
            site_id: site.site_id(),
            file,
            subjects: site.len(),
            outliers,
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
    }
    let (kind, dim, states) = match data.sites.first() {
        Some(SiteData::Vectors(d)) => ("vectors", Some(d.dim()), None),
        Some(SiteData::Sequences(d)) => ("sequences", None, Some(d.states)),
        None => return Err(FontError::EmptyInput("dataset has no sites".into())),
    };
    let mut notes = Vec::new();
    if !data.contaminated_sites.is_empty() {
        notes.push("outlier covariance assumed equal to the cluster covariance sigma2 * I".to_string());
    }
    let manifest = Manifest {
        tool: "font".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        kind: kind.into(),
        seed: data.seed,
        config,
        dim,
        states,
        sites: entries,
        contaminated_sites: data.contaminated_sites.clone(),
        truth: data.truth.clone(),
        notes,
    };
    let mut json = serde_json::to_vec_pretty(&manifest)?;
    json.push(b'\n');
    write_atomic(&dir.join(MANIFEST_FILE), &json)?;
    Ok(manifest)
}

fn parse_label(field: &str, file: &str) -> Result<Option<usize>> {
    if field.is_empty() {
        return Ok(None);
    }
    let l: usize = field.parse().map_err(|_| FontError::ConfigInvalid(format!("{file}: bad label `{field}`")))?;
    if l == 0 {
        return Err(FontError::ConfigInvalid(format!("{file}: labels are one-based")));
    }
    Ok(Some(l - 1))
}

/// Reads a dataset written by [`write_dataset`], verifying file hashes.
pub fn read_dataset(dir: &Path) -> Result<(MultiSiteDataset, Manifest)> {
    let manifest: Manifest = serde_json::from_slice(&fs::read(dir.join(MANIFEST_FILE))?)?;
    let mut sites = Vec::new();
    for entry in &manifest.sites {
        let bytes = fs::read(dir.join(&entry.file))?;
        if hex::encode(Sha256::digest(&bytes)) != entry.sha256 {
            return Err(FontError::ConfigInvalid(format!("{}: hash does not match manifest", entry.file)));
        }
        let mut reader = csv::Reader::from_reader(bytes.as_slice());
        let header = reader.headers()?.clone();
        let n_cols = header.len();
        let mut truth = Vec::new();
        let mut outliers = Vec::new();
        let site = if manifest.kind == "sequences" {
            let states = manifest.states.ok_or_else(|| FontError::ConfigInvalid("manifest lacks states".into()))?;
            let mut sequences = Vec::new();
            for rec in reader.records() {
                let rec = rec?;
                let seq = rec[0]
                    .split_whitespace()
                    .map(|s| match s.parse::<usize>() {
                        Ok(x) if x >= 1 => Ok(x - 1),
                        _ => Err(FontError::ConfigInvalid(format!("{}: bad state `{s}`", entry.file))),
                    })
                    .collect::<Result<Vec<_>>>()?;
                sequences.push(seq);
                truth.push(parse_label(&rec[1], &entry.file)?);
            }
            let mut d = SequenceDataset::new(entry.site_id, states, sequences);
            d.true_labels = Some(truth);
            SiteData::Sequences(d)
        } else {
            let p = n_cols - 2;
            let mut rows = Vec::new();
            for rec in reader.records() {
                let rec = rec?;
                let row = (0..p)
                    .map(|j| {
                        rec[j]
                            .parse::<f64>()
                            .map_err(|_| FontError::ConfigInvalid(format!("{}: bad number", entry.file)))
                    })
                    .collect::<Result<Vec<_>>>()?;
                rows.push(row);
                truth.push(parse_label(&rec[p], &entry.file)?);
                outliers.push(&rec[p + 1] == "1");
            }
            let mut d = VectorDataset::new(entry.site_id, rows).with_truth(truth);
            d.outliers = outliers;
            SiteData::Vectors(d)
        };
        site.validate()?;
        sites.push(site);
    }
    let data = MultiSiteDataset {
        sites,
        truth: manifest.truth.clone(),
        contaminated_sites: manifest.contaminated_sites.clone(),
        seed: manifest.seed,
    };
    Ok((data, manifest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simdata::{gen_gaussian_sites, gen_markov_sites, MarkovSimConfig, Regime, SimulationConfig};

    #[test]
    fn gaussian_roundtrip_and_stable_hashes() {
        let cfg = SimulationConfig {
            sites: 3,
            regime: Regime::Contaminated,
            n_range: (20, 40),
            seed: 4,
            ..Default::default()
        };
        let data = gen_gaussian_sites(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let m1 = write_dataset(dir.path(), &data, serde_json::to_value(&cfg).unwrap()).unwrap();
        let (back, m2) = read_dataset(dir.path()).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(back.sites, data.sites);
        let dir2 = tempfile::tempdir().unwrap();
        let m3 = write_dataset(dir2.path(), &data, serde_json::to_value(&cfg).unwrap()).unwrap();
        assert_eq!(m1.sites, m3.sites);
        assert_eq!(m1.notes.len(), 1);
    }

    #[test]
    fn sequence_roundtrip() {
        let data = gen_markov_sites(&MarkovSimConfig { n_range: (10, 20), seed: 3, ..Default::default() }).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_dataset(dir.path(), &data, serde_json::Value::Null).unwrap();
        let (back, manifest) = read_dataset(dir.path()).unwrap();
        assert_eq!(back.sites, data.sites);
        assert_eq!(manifest.kind, "sequences");
    }

    #[test]
    fn tampered_file_rejected() {
        let data = gen_gaussian_sites(&SimulationConfig { sites: 1, n_range: (10, 10), ..Default::default() }).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_dataset(dir.path(), &data, serde_json::Value::Null).unwrap();
        let f = dir.path().join("site_0.csv");
        let mut text = fs::read_to_string(&f).unwrap();
        text.push_str("0,0,0,0,0,0,0,0,0,0,1,0\n");
        fs::write(&f, text).unwrap();
        assert!(read_dataset(dir.path()).is_err());
    }
}
