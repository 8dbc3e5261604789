//! File formats and raster pre-processing.

mod grid;
mod meteo;
mod outline;
mod samples;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use grid::{apply_geolocation_shift, cloud_free_fraction, upsample_band, BandGrid, CloudMask, NODATA};
pub use meteo::{parse_meteo_csv, read_meteo, write_meteo, write_meteo_csv, METEO_HEADER};
pub use outline::{extract_clean_pixels, LakeOutline};
pub use samples::{
    parse_samples_csv, read_samples, write_samples, write_samples_csv, Label, PixelSample,
};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("missing header row")]
    MissingHeader,
    #[error("bad header: {0}")]
    Header(String),
    #[error("line {line}: {message}")]
    Row { line: usize, message: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Grid(String),
    #[error("{0}")]
    Outline(String),
}

impl IngestError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// True for failures of the underlying file system rather than content.
    pub fn is_io(&self) -> bool {
        match self {
            Self::Io { .. } => true,
            Self::Csv(e) => e.is_io_error(),
            _ => false,
        }
    }
}

pub(crate) fn parse_f64(field: &str, line: usize, column: &str) -> Result<f64, IngestError> {
    field.trim().parse::<f64>().map_err(|_| IngestError::Row {
        line,
        message: format!("column {column}: {field:?} is not a number"),
    })
}
