//! Scenario front end: configuration, execution, persistence, decay fitting
//! and the randomized validation battery.

pub mod config;
pub mod fit;
pub mod run;
pub mod validate;

pub use config::{ScenarioConfig, WeightsKind};
pub use fit::{DecayFit, DecayVerdict, fit_decay};
pub use run::{CSV_HEADER, ScenarioSummary, read_csv, run_scenario, write_csv};
pub use validate::{CheckResult, ValidationReport, validate_suite};
