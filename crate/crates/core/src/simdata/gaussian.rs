use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{categorical, dirichlet, GroundTruth, MultiSiteDataset};
use crate::data::{SiteData, VectorDataset};
use crate::error::{FontError, Result};
use crate::rng::{self, tag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Equal cluster proportions at every site.
    Homogeneous,
    /// Site-specific proportions drawn from a symmetric Dirichlet.
    Imbalanced,
    /// Imbalanced plus outlying observations at a fraction of sites.
    Contaminated,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Homogeneous => "homogeneous",
            Regime::Imbalanced => "imbalanced",
            Regime::Contaminated => "contaminated",
        }
    }
}

impl std::str::FromStr for Regime {
    type Err = FontError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "homogeneous" => Ok(Regime::Homogeneous),
            "imbalanced" => Ok(Regime::Imbalanced),
            "contaminated" => Ok(Regime::Contaminated),
            other => Err(FontError::ConfigInvalid(format!("unknown regime `{other}`"))),
        }
    }
}

/// How entries of the cluster means are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MuMode {
    /// Each entry is -1 or +1 with equal probability.
    #[default]
    TwoPoint,
    /// Each entry uniform on [-1, 1].
    Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulationConfig {
    pub sites: usize,
    pub k: usize,
    pub p: usize,
    /// Per-coordinate noise variance.
    pub sigma2: f64,
    /// Inclusive range of per-site sample sizes.
    pub n_range: (usize, usize),
    pub regime: Regime,
    pub dirichlet_alpha: f64,
    pub outlier_site_frac: f64,
    pub outlier_data_frac: f64,
    pub outlier_mean_range: (f64, f64),
    pub mu_mode: MuMode,
    pub seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            sites: 10,
            k: 5,
            p: 10,
            sigma2: 0.05,
            n_range: (50, 500),
            regime: Regime::Homogeneous,
            dirichlet_alpha: 1.0,
            outlier_site_frac: 0.2,
            outlier_data_frac: 0.2,
            outlier_mean_range: (-5.0, 5.0),
            mu_mode: MuMode::TwoPoint,
            seed: 0,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(FontError::ConfigInvalid(m.to_string()));
        if self.sites == 0 || self.k == 0 || self.p == 0 {
            return bad("sites, k and p must be positive");
        }
        if !(self.sigma2.is_finite() && self.sigma2 > 0.0) {
            return bad("sigma2 must be positive");
        }
        if self.n_range.0 < self.k || self.n_range.0 > self.n_range.1 {
            return bad("n_range must satisfy k <= min <= max");
        }
        if !(self.dirichlet_alpha > 0.0) {
            return bad("dirichlet_alpha must be positive");
        }
        for f in [self.outlier_site_frac, self.outlier_data_frac] {
            if !(0.0..=1.0).contains(&f) {
                return bad("outlier fractions must lie in [0, 1]");
            }
        }
        if !(self.outlier_mean_range.0 <= self.outlier_mean_range.1) {
            return bad("outlier_mean_range is reversed");
        }
        Ok(())
    }

    /// Number of contaminated sites (rounded up).
    pub fn contaminated_site_count(&self) -> usize {
        match self.regime {
            Regime::Contaminated => (self.outlier_site_frac * self.sites as f64 - 1e-9).ceil().max(0.0) as usize,
            _ => 0,
        }
    }
}

/// Generates every site. Clean observations depend only on the seed (not the
/// regime's outlier settings), so the imbalanced and contaminated regimes share
/// their clean data at equal seeds.
pub fn gen_gaussian_sites(cfg: &SimulationConfig) -> Result<MultiSiteDataset> {
    cfg.validate()?;
    let mut mu_rng = rng::stream(cfg.seed, &[tag("mu")]);
    let mus: Vec<Vec<f64>> = (0..cfg.k)
        .map(|_| {
            (0..cfg.p)
                .map(|_| match cfg.mu_mode {
                    MuMode::TwoPoint => {
                        if mu_rng.random::<bool>() {
                            1.0
                        } else {
                            -1.0
                        }
                    }
                    MuMode::Interval => mu_rng.random_range(-1.0..=1.0),
                })
                .collect()
        })
        .collect();
    let sd = cfg.sigma2.sqrt();
    let noise = Normal::new(0.0, sd).map_err(|e| FontError::ConfigInvalid(e.to_string()))?;

    let n_contaminated = cfg.contaminated_site_count().min(cfg.sites);
    let mut contaminated_sites: Vec<usize> = if n_contaminated > 0 {
        let mut r = rng::stream(cfg.seed, &[tag("outlier-sites")]);
        index::sample(&mut r, cfg.sites, n_contaminated).into_vec()
    } else {
        Vec::new()
    };
    contaminated_sites.sort_unstable();

    let mut sites = Vec::with_capacity(cfg.sites);
    for m in 0..cfg.sites {
        let n = rng::stream(cfg.seed, &[tag("size"), m as u64]).random_range(cfg.n_range.0..=cfg.n_range.1);
        let mut r = rng::stream(cfg.seed, &[tag("site"), m as u64]);
        let labels: Vec<usize> = match cfg.regime {
            Regime::Homogeneous => {
                let mut l: Vec<usize> = (0..n).map(|i| i % cfg.k).collect();
                l.shuffle(&mut r);
                l
            }
            Regime::Imbalanced | Regime::Contaminated => {
                let props = dirichlet(cfg.k, cfg.dirichlet_alpha, &mut r)?;
                (0..n).map(|_| categorical(&props, &mut r)).collect()
            }
        };
        let mut rows: Vec<Vec<f64>> =
            labels.iter().map(|&l| mus[l].iter().map(|mu| mu + noise.sample(&mut r)).collect()).collect();
        let mut truth: Vec<Option<usize>> = labels.into_iter().map(Some).collect();

        if contaminated_sites.binary_search(&m).is_ok() {
            let mut o = rng::stream(cfg.seed, &[tag("outliers"), m as u64]);
            let count = (cfg.outlier_data_frac * n as f64 - 1e-9).ceil().max(0.0) as usize;
            let (lo, hi) = cfg.outlier_mean_range;
            let center: Vec<f64> = (0..cfg.p).map(|_| o.random_range(lo..=hi)).collect();
            for _ in 0..count {
                rows.push(center.iter().map(|c| c + noise.sample(&mut o)).collect());
                truth.push(None);
            }
        }
        sites.push(SiteData::Vectors(VectorDataset::new(m, rows).with_truth(truth)));
    }
    Ok(MultiSiteDataset {
        sites,
        truth: Some(GroundTruth::Gaussian { mus, sigma2: cfg.sigma2 }),
        contaminated_sites,
        seed: cfg.seed,
    })
}
