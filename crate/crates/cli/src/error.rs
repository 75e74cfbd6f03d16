use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    /// A numerical guard fired; outputs written so far are kept.
    #[error("numerical guard: {0}")]
    Numerical(String),

    #[error(transparent)]
    Core(pilotwave::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self::Usage(msg.into())
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            Self::Usage(_) => ExitCode::from(2),
            Self::Numerical(_) => ExitCode::from(3),
            Self::Core(_) | Self::Io(_) => ExitCode::from(1),
        }
    }
}

impl From<pilotwave::Error> for CliError {
    fn from(e: pilotwave::Error) -> Self {
        use pilotwave::Error as E;
        match e {
            E::Config(msg) | E::Domain(msg) => Self::Usage(msg),
            E::Aliasing { .. } => Self::Numerical(e.to_string()),
            other => Self::Core(other),
        }
    }
}
