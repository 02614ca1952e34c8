use thiserror::Error;

/// Errors raised by mesh construction, discretisation and the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("mesh error: {0}")]
    Mesh(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("coupling map error: {0}")]
    Coupling(String),
    #[error("mesh file parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("non-finite residual in row {row} ({kind})")]
    NonFinite { row: usize, kind: String },
    #[error("numerically singular system: zero pivot at column {column}")]
    Singular { column: usize },
    #[error(
        "Newton did not converge in {iterations} iterations (residual {last_residual:e}, initial {initial_residual:e})"
    )]
    NonConvergence {
        iterations: usize,
        initial_residual: f64,
        last_residual: f64,
    },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
