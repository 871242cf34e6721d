//! End-to-end experiments: configuration, orchestration and report files.

mod analysis;
mod config;
mod report;
mod run;

pub use analysis::{fit_all_pairs, reports_for, represent, Representation, Represented};
pub use config::{Mode, RunConfig, TrackingConfig};
pub use report::{emit_report, write_tables, TABLES};
pub use run::{
    realisation_variables, run, variable_names, PairStats, RunSummary, Scenario, ScenarioSummary, AR_MAX_ATTEMPTS,
    SCHEMA_VERSION,
};
