//! Configuration, experiment runners and file output behind the `hyperdisp`
//! binary.

pub mod config;
pub mod output;
pub mod run;

pub use config::ExperimentConfig;
pub use run::{execute, write_outputs, Command, Outputs, RunOptions};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// The configuration violates a precondition; nothing was computed.
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) => 2,
            Self::Numerical(_) | Self::Io(_) => 1,
        }
    }
}

/// Exit code for a run whose power iterations did not all converge.
pub const EXIT_NON_CONVERGED: i32 = 3;
