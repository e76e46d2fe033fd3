//! Resampled replicas of a site's data, used to enlarge the model ensemble
//! when there are only a few physical sites.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::messages::Provenance;
use crate::data::SiteData;
use crate::error::{FontError, Result};
use crate::rng::{self, tag};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PseudoSiteConfig {
    /// Replicas per physical site.
    pub replicas: usize,
    /// Replica size as a fraction of the site size (rounded up).
    pub frac: f64,
    pub with_replacement: bool,
}

impl Default for PseudoSiteConfig {
    fn default() -> Self {
        Self { replicas: 4, frac: 0.8, with_replacement: true }
    }
}

impl PseudoSiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicas == 0 {
            return Err(FontError::ConfigInvalid("pseudo-site replicas must be at least 1".into()));
        }
        if !(self.frac > 0.0 && self.frac <= 1.0) {
            return Err(FontError::ConfigInvalid("pseudo-site fraction must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoSite {
    pub provenance: Provenance,
    /// Indices into the parent site's subjects.
    pub indices: Vec<usize>,
    pub data: SiteData,
}

/// `cfg.replicas` resamples of `site`, each of `ceil(frac * n)` subjects.
/// Without replacement and with `frac = 1` every replica is the site itself.
pub fn make_pseudo_sites(site: &SiteData, cfg: &PseudoSiteConfig, seed: u64) -> Result<Vec<PseudoSite>> {
    cfg.validate()?;
    let n = site.len();
    if n == 0 {
        return Err(FontError::EmptyInput(format!("site {} has no subjects", site.site_id())));
    }
    let size = ((cfg.frac * n as f64).ceil() as usize).clamp(1, n);
    Ok((0..cfg.replicas)
        .map(|b| {
            let mut r = rng::stream(seed, &[tag("pseudo-site"), site.site_id() as u64, b as u64]);
            let indices: Vec<usize> = if cfg.with_replacement {
                (0..size).map(|_| r.random_range(0..n)).collect()
            } else {
                let mut idx = index::sample(&mut r, n, size).into_vec();
                idx.sort_unstable();
                idx
            };
            PseudoSite {
                provenance: Provenance { parent_site: site.site_id(), replica: b },
                data: site.subset(&indices),
                indices,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::VectorDataset;

    fn site(n: usize) -> SiteData {
        SiteData::Vectors(VectorDataset::new(3, (0..n).map(|i| vec![i as f64]).collect()))
    }

    #[test]
    fn four_replicas_of_eighty_percent() {
        let ps = make_pseudo_sites(&site(100), &PseudoSiteConfig::default(), 1).unwrap();
        assert_eq!(ps.len(), 4);
        for (b, p) in ps.iter().enumerate() {
            assert_eq!(p.data.len(), 80);
            assert_eq!(p.provenance, Provenance { parent_site: 3, replica: b });
        }
        let odd = make_pseudo_sites(&site(7), &PseudoSiteConfig::default(), 1).unwrap();
        assert_eq!(odd[0].data.len(), 6);
    }

    #[test]
    fn identity_without_replacement() {
        let cfg = PseudoSiteConfig { replicas: 1, frac: 1.0, with_replacement: false };
        let ps = make_pseudo_sites(&site(12), &cfg, 9).unwrap();
        assert_eq!(ps[0].indices, (0..12).collect::<Vec<_>>());
        assert_eq!(ps[0].data, site(12));
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let cfg = PseudoSiteConfig::default();
        let a = make_pseudo_sites(&site(50), &cfg, 5).unwrap();
        let b = make_pseudo_sites(&site(50), &cfg, 5).unwrap();
        let c = make_pseudo_sites(&site(50), &cfg, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a[0].indices, c[0].indices);
        assert_ne!(a[0].indices, a[1].indices);
    }

    #[test]
    fn rejects_bad_config() {
        for cfg in [
            PseudoSiteConfig { replicas: 0, ..Default::default() },
            PseudoSiteConfig { frac: 0.0, ..Default::default() },
            PseudoSiteConfig { frac: 1.5, ..Default::default() },
        ] {
            assert!(matches!(make_pseudo_sites(&site(5), &cfg, 0), Err(FontError::ConfigInvalid(_))));
        }
    }
}
