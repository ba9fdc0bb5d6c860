//! Named end-to-end experiments with machine-readable reports.

pub mod config;
pub mod report;
mod run;
pub mod validate;

pub use config::{OneOrMany, ProfileSpec, ScenarioConfig, ScenarioName};
pub use report::{Assertion, Comparison, Record, ScenarioReport, Status, SweepRow};
pub use run::{convergence_sweep, run_scenario};
pub use validate::{validate, validate_with, ValidationHooks};
