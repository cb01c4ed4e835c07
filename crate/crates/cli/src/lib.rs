//! Scenario runner, worked-example gallery and report emission on top of
//! `tvspec-core`.

pub mod emit;
pub mod error;
pub mod gallery;
pub mod report;
pub mod scenario;

pub use error::CliError;
pub use report::{run_gallery, run_scenario, Params, Report};
pub use scenario::Scenario;
