//! Scenario runner: reads a TOML scenario, runs one pipeline and emits CSV
//! tables plus a JSON report.

pub mod noise;
pub mod output;
pub mod pipelines;
pub mod scenario;

pub use output::Artifacts;
pub use scenario::{Loaded, Scenario};
