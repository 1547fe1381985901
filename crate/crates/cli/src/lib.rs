//! Command-line front end for `arbpack`: JSON instance and result files,
//! the `check`/`solve`/`replay` commands and the corpus harness.

pub mod commands;
pub mod format;
pub mod harness;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] arbpack::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}
