//! Per-site datasets.
//!
//! Labels and states are zero-based in memory (`0..k`, `0..states`). The
//! on-disk and wire formats are one-based; conversion happens at the IO edge.

use serde::{Deserialize, Serialize};

use crate::error::{FontError, Result};

/// Feature rows held by one site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorDataset {
    pub site_id: usize,
    pub rows: Vec<Vec<f64>>,
    /// Ground truth when known. `None` entries are outliers that belong to no cluster.
    pub true_labels: Option<Vec<Option<usize>>>,
    pub outliers: Vec<bool>,
}

impl VectorDataset {
    pub fn new(site_id: usize, rows: Vec<Vec<f64>>) -> Self {
        let outliers = vec![false; rows.len()];
        Self { site_id, rows, true_labels: None, outliers }
    }

    pub fn with_truth(mut self, labels: Vec<Option<usize>>) -> Self {
        self.outliers = labels.iter().map(Option::is_none).collect();
        self.true_labels = Some(labels);
        self
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.dim();
        for row in &self.rows {
            if row.len() != p {
                return Err(FontError::DimensionMismatch { expected: p, got: row.len() });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(FontError::NonFinite);
            }
        }
        if self.outliers.len() != self.rows.len() {
            return Err(FontError::LengthMismatch { a: self.outliers.len(), b: self.rows.len() });
        }
        if let Some(t) = &self.true_labels {
            if t.len() != self.rows.len() {
                return Err(FontError::LengthMismatch { a: t.len(), b: self.rows.len() });
            }
        }
        Ok(())
    }
}

/// Categorical sequences over `0..states` held by one site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceDataset {
    pub site_id: usize,
    pub states: usize,
    pub sequences: Vec<Vec<usize>>,
    pub true_labels: Option<Vec<Option<usize>>>,
}

impl SequenceDataset {
    pub fn new(site_id: usize, states: usize, sequences: Vec<Vec<usize>>) -> Self {
        Self { site_id, states, sequences, true_labels: None }
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        for (index, seq) in self.sequences.iter().enumerate() {
            if seq.len() < 2 {
                return Err(FontError::SequenceTooShort { index, len: seq.len() });
            }
            if let Some(&s) = seq.iter().find(|&&s| s >= self.states) {
                return Err(FontError::InvalidState { state: s + 1, states: self.states });
            }
        }
        if let Some(t) = &self.true_labels {
            if t.len() != self.sequences.len() {
                return Err(FontError::LengthMismatch { a: t.len(), b: self.sequences.len() });
            }
        }
        Ok(())
    }
}

/// Data held by one site, of either supported kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SiteData {
    Vectors(VectorDataset),
    Sequences(SequenceDataset),
}

impl SiteData {
    pub fn site_id(&self) -> usize {
        match self {
            SiteData::Vectors(d) => d.site_id,
            SiteData::Sequences(d) => d.site_id,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            SiteData::Vectors(d) => d.len(),
            SiteData::Sequences(d) => d.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn true_labels(&self) -> Option<&[Option<usize>]> {
        match self {
            SiteData::Vectors(d) => d.true_labels.as_deref(),
            SiteData::Sequences(d) => d.true_labels.as_deref(),
        }
    }

    /// Copy holding only the subjects at `indices` (repeats allowed).
    pub fn subset(&self, indices: &[usize]) -> SiteData {
        let pick_truth =
            |t: &Option<Vec<Option<usize>>>| t.as_ref().map(|t| indices.iter().map(|&i| t[i]).collect::<Vec<_>>());
        match self {
            SiteData::Vectors(d) => SiteData::Vectors(VectorDataset {
                site_id: d.site_id,
                rows: indices.iter().map(|&i| d.rows[i].clone()).collect(),
                true_labels: pick_truth(&d.true_labels),
                outliers: indices.iter().map(|&i| d.outliers[i]).collect(),
            }),
            SiteData::Sequences(d) => SiteData::Sequences(SequenceDataset {
                site_id: d.site_id,
                states: d.states,
                sequences: indices.iter().map(|&i| d.sequences[i].clone()).collect(),
                true_labels: pick_truth(&d.true_labels),
            }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SiteData::Vectors(d) => d.validate(),
            SiteData::Sequences(d) => d.validate(),
        }
    }
}

/// Concatenated ground truth over sites, in site order. `None` marks outliers
/// and subjects without a label; `None` overall when any site lacks truth.
pub fn stacked_truth(sites: &[SiteData]) -> Option<Vec<Option<usize>>> {
    let mut out = Vec::new();
    for s in sites {
        out.extend_from_slice(s.true_labels()?);
    }
    Some(out)
}

/// Labels of every subject under every model, stored by column (one column
/// per model). Row order is the stacked subject order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelMatrix {
    pub columns: Vec<Vec<usize>>,
    /// Cluster count of each column's model.
    pub ks: Vec<usize>,
}

impl LabelMatrix {
    pub fn new(columns: Vec<Vec<usize>>, ks: Vec<usize>) -> Result<Self> {
        let lm = Self { columns, ks };
        lm.validate()?;
        Ok(lm)
    }

    pub fn n(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn m(&self) -> usize {
        self.columns.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.ks.len() != self.columns.len() {
            return Err(FontError::LengthMismatch { a: self.ks.len(), b: self.columns.len() });
        }
        let n = self.n();
        for (col, &k) in self.columns.iter().zip(&self.ks) {
            if col.len() != n {
                return Err(FontError::SubjectCountMismatch { a: n, b: col.len() });
            }
            if let Some(&l) = col.iter().find(|&&l| l >= k) {
                return Err(FontError::LabelOutOfRange { label: l + 1, k });
            }
        }
        Ok(())
    }
}
