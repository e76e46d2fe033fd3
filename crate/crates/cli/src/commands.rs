use std::fs;
use std::path::{Path, PathBuf};

use font_core::federation::{
    run_benchmark_suite, run_dataset, summarize, write_results_csv, write_summary_csv, write_timings_csv, Cell,
    PseudoSiteConfig, RunReport,
};
use font_core::simdata::{gen_gaussian_sites, gen_markov_sites, read_dataset, write_dataset, Manifest};
use font_core::{FontError, Result};
use serde_json::{json, Value};

use crate::config::{resolve_seed, write_file_atomic, ConfigFile, DataKind, Staged};
use crate::{Outcome, ReportArgs, RunArgs, SimulateArgs};

fn with_kind(mut config: Value, kind: &str) -> Value {
    if let Value::Object(map) = &mut config {
        map.insert("kind".into(), Value::String(kind.into()));
    }
    config
}

pub fn simulate(a: &SimulateArgs) -> Result<Outcome> {
    let file = ConfigFile::load(a.config.as_deref())?.simulate;
    let kind = a.kind.unwrap_or(file.kind);
    let n_range = |default: (usize, usize)| (a.n_min.unwrap_or(default.0), a.n_max.unwrap_or(default.1));

    let (data, config) = match kind {
        DataKind::Gaussian => {
            let mut cfg = file.gaussian;
            cfg.seed = resolve_seed(a.seed, Some(cfg.seed))?;
            cfg.regime = a.regime.unwrap_or(cfg.regime);
            cfg.sites = a.m.unwrap_or(cfg.sites);
            cfg.sigma2 = a.sigma2.unwrap_or(cfg.sigma2);
            cfg.k = a.k.unwrap_or(cfg.k);
            cfg.p = a.p.unwrap_or(cfg.p);
            cfg.n_range = n_range(cfg.n_range);
            (gen_gaussian_sites(&cfg)?, with_kind(serde_json::to_value(&cfg)?, "gaussian"))
        }
        DataKind::Markov => {
            if a.regime.is_some() || a.sigma2.is_some() || a.p.is_some() {
                return Err(FontError::ConfigInvalid("--regime, --sigma2 and --p apply to gaussian data only".into()));
            }
            let mut cfg = file.markov;
            cfg.seed = resolve_seed(a.seed, Some(cfg.seed))?;
            cfg.sites = a.m.unwrap_or(cfg.sites);
            cfg.k = a.k.unwrap_or(cfg.k);
            cfg.n_range = n_range(cfg.n_range);
            (gen_markov_sites(&cfg)?, with_kind(serde_json::to_value(&cfg)?, "markov"))
        }
    };

    let staged = Staged::new(&a.out, a.force)?;
    let manifest = write_dataset(staged.path(), &data, config)?;
    staged.commit()?;
    log::info!("wrote {} sites ({} subjects) to {}", manifest.sites.len(), data.total_subjects(), a.out.display());
    Ok(Outcome::Ok)
}

/// Names a dataset's cell from its manifest.
fn manifest_cell(m: &Manifest) -> Cell {
    let c = &m.config;
    let setting = c
        .get("regime")
        .and_then(Value::as_str)
        .or_else(|| c.get("kind").and_then(Value::as_str))
        .unwrap_or(&m.kind)
        .to_string();
    let sigma2 = c.get("sigma2").and_then(Value::as_f64);
    let n_range = c.get("n_range").and_then(|v| serde_json::from_value::<(usize, usize)>(v.clone()).ok());
    Cell { setting, sigma2, n_range }
}

pub fn run(a: &RunArgs) -> Result<Outcome> {
    let mut suite = ConfigFile::load(a.config.as_deref())?.run.unwrap_or_default();
    suite.seed = resolve_seed(a.seed, Some(suite.seed))?;
    let opts = &mut suite.options;
    if let Some(methods) = &a.methods {
        opts.methods = methods.clone();
    }
    opts.k = a.k.or(opts.k);
    opts.allow_oracle |= a.allow_oracle;
    if a.pseudo_sites && opts.font.pseudo_sites.is_none() {
        opts.font.pseudo_sites = Some(PseudoSiteConfig::default());
    }
    if let Some(t) = a.transport {
        opts.font.transport = t.into();
    }
    suite.replicates = a.replicates.unwrap_or(suite.replicates);
    if suite.options.methods.is_empty() {
        return Err(FontError::ConfigInvalid("no methods requested".into()));
    }
    suite.options.check_oracle()?;

    let report = match &a.data {
        Some(dir) => {
            if a.regimes.is_some() || a.m.is_some() || a.sigma2.is_some() {
                return Err(FontError::ConfigInvalid(
                    "--regimes, --m and --sigma2 describe a simulated grid; drop --data".into(),
                ));
            }
            let (data, manifest) = read_dataset(dir)?;
            let config = json!({
                "data": dir.display().to_string(),
                "dataset": { "seed": manifest.seed, "config": manifest.config, "sites": manifest.sites },
                "replicates": suite.replicates,
                "options": suite.options,
            });
            log::info!("running {} replicates on {} sites", suite.replicates, data.sites.len());
            run_dataset(&data.sites, &manifest_cell(&manifest), suite.replicates, suite.seed, &suite.options, config)?
        }
        None => {
            suite.regimes = a.regimes.clone().unwrap_or(suite.regimes);
            suite.sites = a.m.clone().unwrap_or(suite.sites);
            suite.sigma2 = a.sigma2.clone().unwrap_or(suite.sigma2);
            log::info!(
                "simulating {} cells x {} replicates",
                suite.regimes.len() * suite.sites.len() * suite.sigma2.len(),
                suite.replicates
            );
            run_benchmark_suite(&suite)?
        }
    };

    let staged = Staged::new(&a.out, a.force)?;
    let dir = staged.path();
    fs::write(dir.join("report.json"), serde_json::to_vec_pretty(&report)?)?;
    write_results_csv(fs::File::create(dir.join("results.csv"))?, &report)?;
    write_timings_csv(fs::File::create(dir.join("timings.csv"))?, &report)?;
    staged.commit()?;
    for f in &report.failures {
        log::warn!("{} {} replicate {}: {}", f.setting, f.method, f.replicate, f.error);
    }
    Ok(match report.failures.len() {
        0 => Outcome::Ok,
        n => Outcome::Partial(n),
    })
}

fn find_reports(path: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    if path.is_dir() {
        let mut entries: Vec<PathBuf> =
            fs::read_dir(path)?.map(|e| e.map(|e| e.path())).collect::<std::io::Result<_>>()?;
        entries.sort();
        for e in entries {
            if e.is_dir() {
                find_reports(&e, out)?;
            } else if e.file_name().is_some_and(|n| n == "report.json") {
                out.push(e);
            }
        }
    } else if path.is_file() {
        out.push(path.to_path_buf());
    } else {
        return Err(FontError::EmptyInput(format!("{} does not exist", path.display())));
    }
    Ok(())
}

pub fn report(a: &ReportArgs) -> Result<Outcome> {
    let mut files = Vec::new();
    for input in &a.inputs {
        find_reports(input, &mut files)?;
    }
    if files.is_empty() {
        return Err(FontError::EmptyInput("no report.json found under the given inputs".into()));
    }
    let mut records = Vec::new();
    let mut sources = Vec::new();
    let mut seed = None;
    for f in &files {
        let r: RunReport = serde_json::from_slice(&fs::read(f)?)?;
        seed.get_or_insert(r.seed);
        sources.push(json!({ "path": f.display().to_string(), "seed": r.seed, "config": r.config }));
        records.extend(r.records);
    }
    let summary = summarize(&records);
    let mut buf = Vec::new();
    write_summary_csv(&mut buf, &summary, seed.unwrap_or(0), &json!({ "inputs": sources }))?;
    write_file_atomic(&a.out, &buf)?;
    log::info!("pooled {} reports into {} rows", files.len(), summary.len());
    Ok(Outcome::Ok)
}
