//! Batch front end: dataset ingestion, cross-validation and scenario runs.

pub mod cv;
pub mod dataset;
pub mod scenario;

pub use cv::{cross_validate, EvalConfig, EvalResult, FoldResult};
pub use dataset::{load_dataset, parse_dataset, Dataset};
pub use scenario::{parse_scenario, run_scenario, run_scenario_file, Scenario, ScenarioReport};
