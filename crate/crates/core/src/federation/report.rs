//! Flat CSV tables of a run. Every file starts with one comment line naming
//! the tool version, master seed and the effective configuration.
//!
//! Wall-clock times live in their own table so that the results and summary
//! tables are byte-identical across reruns with the same inputs and seed.

use std::io::Write;

use super::suite::{CellSummary, RunReport};
use crate::error::Result;

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

/// `# font <version> seed=<seed> config=<json>`
pub fn header_line(seed: u64, config: &serde_json::Value) -> Result<String> {
    Ok(format!("# font {} seed={seed} config={}\n", env!("CARGO_PKG_VERSION"), serde_json::to_string(config)?))
}

fn table<W: Write>(mut w: W, header: &str, columns: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
    w.write_all(header.as_bytes())?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(columns)?;
    for row in rows {
        csv.write_record(&row)?;
    }
    csv.flush()?;
    Ok(())
}

/// One row per `(setting, replicate, method)`.
pub fn write_results_csv<W: Write>(w: W, report: &RunReport) -> Result<()> {
    let rows = report
        .records
        .iter()
        .map(|r| {
            vec![
                r.setting.clone(),
                r.m.to_string(),
                opt(r.sigma2),
                r.n_range.map_or_else(String::new, |(a, b)| format!("{a}-{b}")),
                r.method.to_string(),
                r.replicate.to_string(),
                r.seed.to_string(),
                r.k.to_string(),
                opt(r.ari),
                opt(r.weight_corr),
            ]
        })
        .collect();
    table(
        w,
        &header_line(report.seed, &report.config)?,
        &["setting", "M", "sigma2", "n_range", "method", "replicate", "seed", "k", "ari", "weight_corr"],
        rows,
    )
}

pub fn write_timings_csv<W: Write>(w: W, report: &RunReport) -> Result<()> {
    let rows = report
        .records
        .iter()
        .map(|r| {
            vec![
                r.setting.clone(),
                r.m.to_string(),
                opt(r.sigma2),
                r.method.to_string(),
                r.replicate.to_string(),
                r.seconds.to_string(),
            ]
        })
        .collect();
    table(
        w,
        &header_line(report.seed, &report.config)?,
        &["setting", "M", "sigma2", "method", "replicate", "seconds"],
        rows,
    )
}

/// Tidy per-cell table for plotting.
pub fn write_summary_csv<W: Write>(w: W, summary: &[CellSummary], seed: u64, config: &serde_json::Value) -> Result<()> {
    let rows = summary
        .iter()
        .map(|s| {
            vec![
                s.setting.clone(),
                s.m.to_string(),
                opt(s.sigma2),
                s.method.to_string(),
                s.replicates.to_string(),
                opt(s.mean_ari),
                opt(s.sd_ari),
                opt(s.mean_weight_corr),
            ]
        })
        .collect();
    table(
        w,
        &header_line(seed, config)?,
        &["regime", "M", "sigma2", "method", "replicates", "mean_ari", "sd_ari", "mean_weight_corr"],
        rows,
    )
}
