//! Experiments, file formats and the command-line front end for local linear
//! drift estimation under α-stable noise. The numerical core lives in
//! [`lldrift_core`], re-exported here as [`core`].

use std::fmt::Display;
use std::path::Path;

pub use lldrift_core as core;

pub mod cli;
pub mod config;
pub mod experiments;
pub mod io;
pub mod report;
pub mod stats;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] lldrift_core::Error),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("format error: {0}")]
    Format(String),
    #[error("report integrity: {0}")]
    Integrity(String),
}

impl Error {
    pub fn io(path: &Path, err: impl Display) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }

    /// Usage and configuration problems, as opposed to failures during a run.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::Core(lldrift_core::Error::Config(_))
                | Error::Core(lldrift_core::Error::Parameter { .. })
        )
    }
}
