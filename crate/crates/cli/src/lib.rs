//! Scenario runs, convergence studies and the verification suite.

pub mod config;
pub mod convergence;
pub mod io;
pub mod reports;
pub mod run;
pub mod scenario;
pub mod verify;

pub use config::{Config, ConfigError};
pub use run::{run, simulate, write_outputs, RunRecord};
pub use scenario::{Preset, Scenario};
