//! The one-shot federated protocol, simulated in process: sites fit and
//! broadcast models, label their own subjects under every model, and upload
//! the labels to an analysis center that builds the weighted ensemble.

mod messages;
mod pipeline;
mod pseudo;
mod report;
mod suite;

pub use messages::{
    check_round1, check_round2, Provenance, SiteMessageRound1, SiteMessageRound2, Transcript, Transport,
    PROTOCOL_VERSION,
};
pub use pipeline::{run_font, FontConfig, FontOutcome, FontSummary, FontTimings, ModelSummary};
pub use pseudo::{make_pseudo_sites, PseudoSite, PseudoSiteConfig};
pub use report::{header_line, write_results_csv, write_summary_csv, write_timings_csv};
pub use suite::{
    font_weight_corr, replicate_seed, run_benchmark_suite, run_dataset, run_replicate, summarize, Cell, CellSummary,
    FailureRecord, MethodOptions, ReplicateOutput, ReplicateRecord, RunReport, SuiteConfig,
};
