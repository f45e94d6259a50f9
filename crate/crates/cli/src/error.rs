use thiserror::Error;

/// Failures of a scenario run, split by the exit code they map to.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad or unreadable configuration; nothing is written.
    #[error("invalid configuration: {0}")]
    Validation(String),

    /// The engine refused the validated input; nothing is written.
    #[error("engine error: {0}")]
    Engine(String),

    #[error("cannot write output: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) | CliError::Output(_) => 2,
            CliError::Engine(_) => 3,
        }
    }

    /// Wraps any error as a validation failure of `field`.
    pub fn field<E: std::fmt::Display>(field: &str) -> impl FnOnce(E) -> CliError + '_ {
        move |e| CliError::Validation(format!("{field}: {e}"))
    }
}

impl From<qmwb_core::Error> for CliError {
    fn from(e: qmwb_core::Error) -> Self {
        CliError::Engine(e.to_string())
    }
}

impl From<qmwb_bohm::BohmError> for CliError {
    fn from(e: qmwb_bohm::BohmError) -> Self {
        CliError::Engine(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
