//! Batch experiment runner for `vlab-core`: reads a flat configuration,
//! executes a sweep and writes a CSV or JSON report.

pub mod config;
pub mod report;
pub mod run;

pub use config::{ConfigError, Experiment, ExperimentConfig, Format};
pub use report::{ExperimentReport, RunRecord, VerdictRecord};
pub use run::{run, run_with, RunOptions, BESSEL_CACHE_ENV};

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const CONFIG: u8 = 2;
    pub const RUN: u8 = 3;
}

/// Renders the report in the configured format.
pub fn render(report: &ExperimentReport) -> Result<String, String> {
    match report.config.format {
        Format::Csv => report.to_csv().map_err(|e| e.to_string()),
        Format::Json => report.to_json().map_err(|e| e.to_string()),
    }
}
