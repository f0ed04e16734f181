//! Experiment drivers built on the solver, optimizer and CASCI modules.

mod bound;
mod pipeline;
mod scan;

pub use bound::{verify_bound, verify_bound_with, BoundOptions, BoundReport, ChainFlags, BOUND_SLACK};
pub use pipeline::{run_pipeline, PipelineConfig, ReportBundle};
pub use scan::{
    pearson, sample_seeds, scan_csv, scan_random_bases, scan_random_bases_with, summarize_scan, ScanOptions,
    ScanSample, ScanSummary,
};
