//! Configuration-driven studies on top of `ffpm`: manufactured-solution
//! convergence, interface oscillations behind a porous obstacle, and
//! Forchheimer flow through a porous bed.

pub mod config;
pub mod error;
pub mod output;
pub mod problems;
pub mod studies;

pub use config::{StudyConfig, StudyKind};
pub use error::{CliError, CliResult};
