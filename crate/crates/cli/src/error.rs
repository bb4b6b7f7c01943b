use std::path::PathBuf;

use commfolio_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("stage `{needed}` has not been run ({} is missing); run `commfolio {needed}` first", missing.display())]
    MissingStage { needed: &'static str, missing: PathBuf },

    #[error("stage `{stage}` output is inconsistent: {message}")]
    Corrupt { stage: &'static str, message: String },

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Core(#[from] CoreError),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    /// Process exit status: 2 config, 3 data, 4 staged dependency, 5 numerical.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::MissingStage { .. } | CliError::Corrupt { .. } => 4,
            CliError::Io { .. } => 3,
            CliError::Core(e) => match e {
                CoreError::Spec(_) | CoreError::Usage(_) | CoreError::Domain(_) | CoreError::Size(_) => 2,
                CoreError::Parse { .. }
                | CoreError::Data(_)
                | CoreError::EmptyUniverse { .. }
                | CoreError::InsufficientData { .. }
                | CoreError::Io(_) => 3,
                CoreError::Disconnected
                | CoreError::EmptyGraph
                | CoreError::Aggregation(_)
                | CoreError::Numerical(_) => 5,
            },
        }
    }
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}
