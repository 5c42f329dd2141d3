use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] ans_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("blow-up: {0}")]
    BlowUp(String),
    #[error("check suites failed: {0}")]
    CheckFailed(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    /// 2 configuration, 3 blow-up, 4 failed check suite, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        use ans_core::Error as E;
        match self {
            Self::Config(_) => 2,
            Self::Core(E::InvalidGrid(_) | E::InvalidParameter(_) | E::InvalidExponent(_) | E::Unresolvable(_)) => 2,
            Self::Core(E::ZeroVerticalViscosity) => 2,
            Self::BlowUp(_) | Self::Core(E::BlowUp { .. }) => 3,
            Self::CheckFailed(_) => 4,
            _ => 1,
        }
    }
}
