use std::path::PathBuf;

use thiserror::Error;

/// Process exit statuses.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const CHART_BREAKDOWN: i32 = 3;
    pub const BLOW_UP: i32 = 4;
    pub const POSITIVITY_VIOLATION: i32 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Core(#[from] mingraph_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use mingraph_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Core(E::InvalidInput(_)) => exit::CONFIG,
            CliError::Core(E::ChartBreakdown { .. } | E::SpacelikeBreakdown { .. }) => {
                exit::CHART_BREAKDOWN
            }
            _ => exit::FAILURE,
        }
    }
}

pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}
