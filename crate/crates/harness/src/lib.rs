//! Scenario files, theorem checks, suites and CSV reports on top of
//! `capacity-core`.
//!
//! A scenario names a check (`kind`), the geometry it runs on (a convex body
//! or a warped model, inline or by file) and numeric parameters. Running it
//! produces a [`Report`] whose verdict follows from the signed slack and the
//! kind's inequality direction.

pub mod curvature;
pub mod descriptor;
pub mod export;
pub mod report;
pub mod run;
pub mod scenario;
pub mod suite;

pub use report::{emit_csv, parse_csv, Report};
pub use run::run_scenario;
pub use scenario::{Kind, Overrides, Scenario};
pub use suite::{run_suite, SuiteSummary};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "CAP_WORKERS";

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] capacity_core::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}
