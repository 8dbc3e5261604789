//! Batch command-line front end for the lake ice pipeline.

pub mod commands;
pub mod config;
pub mod output;
pub mod svg;

use std::path::Path;

pub use config::{ConfigFlags, PipelineConfig};
pub use svg::render_svg_timeline;

/// Failure of a subcommand. Bad input maps to exit status 1, file system
/// trouble to 2.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    pub fn from_core(path: &Path, e: lakeice_core::Error) -> Self {
        let msg = format!("{}: {e}", path.display());
        if e.is_io() {
            CliError::Io(msg)
        } else {
            CliError::Invalid(msg)
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}
