//! Command-line front end for `mingraph-core`: JSON job configs, JSON
//! reports, and CSV/OBJ point-cloud export.

pub mod config;
pub mod error;
pub mod jobs;
pub mod report;

pub use config::{JobConfig, Mode};
pub use error::{exit, CliError};
pub use jobs::{run, Outcome};
