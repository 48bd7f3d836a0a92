//! Scenario runner: configuration, built-in battery, orchestration and plots.

pub mod battery;
pub mod plot;
pub mod run;
pub mod scenario;

pub use run::{failure_code, run_scenario, RunOptions, RunOutcome};
pub use scenario::{Scenario, ScenarioKind};
