use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    NonConvergence(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    /// Process exit code.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::NonConvergence(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl From<ffpm::Error> for CliError {
    fn from(e: ffpm::Error) -> Self {
        use ffpm::Error as E;
        match e {
            E::Config(_) | E::Parameter(_) | E::InvalidInput(_) => CliError::Config(e.to_string()),
            E::NonConvergence { .. } | E::Singular { .. } | E::NonFinite { .. } => CliError::NonConvergence(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
