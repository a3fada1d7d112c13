//! Experiment plumbing: config files, seeded sweeps with CSV output, and the
//! acceptance checks.

pub mod acceptance;
mod config;
mod sweep;

pub use acceptance::{run_acceptance, CriterionReport};
pub use config::ConfigFile;
pub use sweep::{run_sweep, write_csv, write_csv_file, ExperimentSpec, SummaryRecord};
