use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const DATA: i32 = 3;
    pub const NUMERICAL: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Data(String),

    #[error("{0}")]
    Numerical(String),

    #[error(transparent)]
    Core(#[from] gpsurr_core::Error),

    #[error(transparent)]
    Serve(#[from] gpsurr_service::ServeError),
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Data(_) => exit::DATA,
            CliError::Numerical(_) => exit::NUMERICAL,
            CliError::Core(e) if e.is_numerical() => exit::NUMERICAL,
            CliError::Core(_) => exit::DATA,
            CliError::Serve(gpsurr_service::ServeError::Registry(_)) => exit::DATA,
            CliError::Serve(_) => exit::USAGE,
        }
    }

    /// Prefixes the message with `context`, keeping the exit class.
    pub fn context(self, context: impl std::fmt::Display) -> Self {
        match self {
            CliError::Usage(m) => CliError::Usage(format!("{context}: {m}")),
            CliError::Data(m) => CliError::Data(format!("{context}: {m}")),
            CliError::Numerical(m) => CliError::Numerical(format!("{context}: {m}")),
            CliError::Core(e) if e.is_numerical() => CliError::Numerical(format!("{context}: {e}")),
            other => CliError::Data(format!("{context}: {other}")),
        }
    }
}

pub trait Context<T> {
    fn context(self, context: impl std::fmt::Display) -> Result<T>;
}

impl<T, E: Into<CliError>> Context<T> for std::result::Result<T, E> {
    fn context(self, context: impl std::fmt::Display) -> Result<T> {
        self.map_err(|e| e.into().context(context))
    }
}
