//! Wire messages of the single communication round and the checks that keep
//! subject-level data from crossing a site boundary.
//!
//! Round 1 carries a model's cluster parameters. Round 2 carries, for a block
//! of a site's own subjects, the label every broadcast model assigns to each
//! of them. Labels are one-based on the wire.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{FontError, Result};
use crate::models::{ClusterModelParams, ModelKind};

pub const PROTOCOL_VERSION: u32 = 1;

/// Where a model came from: the physical site and, for resampled
/// pseudo-sites, the replica index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub parent_site: usize,
    pub replica: usize,
}

/// Broadcast of one fitted local model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteMessageRound1 {
    pub v: u32,
    pub site_id: usize,
    pub model_id: usize,
    pub kind: ModelKind,
    #[serde(rename = "K")]
    pub k: usize,
    pub betas: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixing: Option<Vec<f64>>,
    #[serde(rename = "S", default, skip_serializing_if = "Option::is_none")]
    pub states: Option<usize>,
    pub n_local: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

impl SiteMessageRound1 {
    pub fn new(site_id: usize, model_id: usize, params: &ClusterModelParams, n_local: usize) -> Self {
        Self {
            v: PROTOCOL_VERSION,
            site_id,
            model_id,
            kind: params.kind,
            k: params.k(),
            betas: params.betas.clone(),
            mixing: params.mixing.clone(),
            states: params.states,
            n_local,
            provenance: None,
        }
    }

    pub fn params(&self) -> ClusterModelParams {
        ClusterModelParams {
            kind: self.kind,
            betas: self.betas.clone(),
            mixing: self.mixing.clone(),
            states: self.states,
        }
    }
}

/// Labels assigned by every model to a block of one site's subjects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteMessageRound2 {
    pub v: u32,
    pub site_id: usize,
    /// `model_id -> one-based labels`, aligned with `pseudo_ids`.
    pub labels: BTreeMap<usize, Vec<usize>>,
    pub pseudo_ids: Vec<u64>,
}

/// Every message of one run, in the order the center consumed them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub round1: Vec<SiteMessageRound1>,
    pub round2: Vec<SiteMessageRound2>,
    /// Serialized JSON size of all round-1 messages, in bytes.
    pub round1_bytes: usize,
    /// Serialized JSON size of all round-2 messages, in bytes.
    pub round2_bytes: usize,
}

impl Transcript {
    pub fn message_count(&self) -> usize {
        self.round1.len() + self.round2.len()
    }
}

/// How messages move between parties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transport {
    /// Messages are handed over as objects.
    #[default]
    InProcess,
    /// Every message is serialized to JSON and parsed back before use.
    Json,
}

impl Transport {
    /// Delivers a message, returning the receiver's copy and its wire size.
    pub fn deliver<T>(self, msg: T) -> Result<(T, usize)>
    where
        T: Serialize + for<'de> Deserialize<'de>,
    {
        let wire = serde_json::to_string(&msg)?;
        match self {
            Transport::InProcess => Ok((msg, wire.len())),
            Transport::Json => Ok((serde_json::from_str(&wire)?, wire.len())),
        }
    }
}

fn violation(msg: String) -> FontError {
    FontError::ProtocolViolation(msg)
}

const ROUND1_KEYS: [&str; 10] =
    ["v", "site_id", "model_id", "kind", "K", "betas", "mixing", "S", "n_local", "provenance"];
const ROUND2_KEYS: [&str; 4] = ["v", "site_id", "labels", "pseudo_ids"];

fn check_keys(value: &serde_json::Value, allowed: &[&str], what: &str) -> Result<()> {
    let obj = value.as_object().ok_or_else(|| violation(format!("{what} is not an object")))?;
    if let Some(k) = obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(violation(format!("{what} carries unexpected field `{k}`")));
    }
    Ok(())
}

/// Structural check of a parameter broadcast: only the documented fields,
/// exactly `K` parameter vectors of the size the model kind implies, and no
/// more vectors than the site has subjects.
pub fn check_round1(msg: &SiteMessageRound1) -> Result<()> {
    check_keys(&serde_json::to_value(msg)?, &ROUND1_KEYS, "round-1 message")?;
    let what = format!("round-1 message of model {}", msg.model_id);
    if msg.v != PROTOCOL_VERSION {
        return Err(violation(format!("{what}: protocol version {} unsupported", msg.v)));
    }
    if msg.betas.len() != msg.k || msg.k == 0 {
        return Err(violation(format!("{what}: {} parameter vectors for K = {}", msg.betas.len(), msg.k)));
    }
    if msg.k > msg.n_local {
        return Err(violation(format!("{what}: K = {} exceeds n_local = {}", msg.k, msg.n_local)));
    }
    let d = msg.betas[0].len();
    if msg.betas.iter().any(|b| b.len() != d) {
        return Err(violation(format!("{what}: ragged parameter vectors")));
    }
    match msg.kind {
        ModelKind::Kmeans => {
            if msg.mixing.is_some() || msg.states.is_some() {
                return Err(violation(format!("{what}: k-means message with Markov fields")));
            }
        }
        ModelKind::MarkovMixture => {
            let s = msg.states.ok_or_else(|| violation(format!("{what}: missing S")))?;
            if d != s + s * s {
                return Err(violation(format!("{what}: parameter length {d} does not match S = {s}")));
            }
            if msg.mixing.as_ref().map(Vec::len) != Some(msg.k) {
                return Err(violation(format!("{what}: mixing must have K entries")));
            }
        }
    }
    msg.params().validate().map_err(|e| violation(format!("{what}: {e}")))
}

/// Structural check of a label upload: only integer labels within each
/// model's cluster range, one per pseudo id, for exactly the broadcast models.
pub fn check_round2(msg: &SiteMessageRound2, ks: &BTreeMap<usize, usize>) -> Result<()> {
    check_keys(&serde_json::to_value(msg)?, &ROUND2_KEYS, "round-2 message")?;
    let what = format!("round-2 message of site {}", msg.site_id);
    if msg.v != PROTOCOL_VERSION {
        return Err(violation(format!("{what}: protocol version {} unsupported", msg.v)));
    }
    if msg.labels.len() != ks.len() || msg.labels.keys().any(|m| !ks.contains_key(m)) {
        return Err(violation(format!("{what}: label columns do not match the broadcast models")));
    }
    for (m, col) in &msg.labels {
        if col.len() != msg.pseudo_ids.len() {
            return Err(violation(format!(
                "{what}: model {m} has {} labels for {} subjects",
                col.len(),
                msg.pseudo_ids.len()
            )));
        }
        let k = ks[m];
        if let Some(&l) = col.iter().find(|&&l| l == 0 || l > k) {
            return Err(violation(format!("{what}: label {l} outside 1..={k} for model {m}")));
        }
    }
    Ok(())
}
