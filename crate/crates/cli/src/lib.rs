//! Command-line harness for the eitmem simulator: configuration loading,
//! operating points, sweeps, calibration and the reproduction report.

pub mod config;
pub mod error;
pub mod report;
pub mod reproduce;
pub mod scenario;
pub mod units;

pub use config::{Format, ScenarioConfig};
pub use error::HarnessError;
pub use reproduce::{reproduce_paper, Check, Reproduction};
pub use scenario::{
    optimize_mode, run_scenario, sweep_mean_photon, sweep_storage_time, ResultRow, Scenario, ScenarioReport,
};
