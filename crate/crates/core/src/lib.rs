//! Lake ice phenology from low-resolution optical satellite time series.
//!
//! Pixels of each lake are classified frozen / non-frozen, aggregated into
//! a per-winter timeline of the non-frozen percentage, and the four ice
//! phenology dates (freeze-up start / end, break-up start / end) are fitted
//! to that timeline. Multi-winter trends and correlations with station
//! meteorology are computed from the fitted dates. A synthetic generator
//! with known truth drives the tests.

pub mod classify;
pub mod climate;
pub mod ingest;
pub mod phenology;
pub mod pipeline;
pub mod robust;
pub mod season;
pub mod synth;
pub mod timeline;

pub use classify::{IceClass, LinearModel};
pub use climate::{ClimateSeries, DailyRecord, Metric, WinterIndicators};
pub use ingest::{Label, PixelSample};
pub use phenology::{EventCandidates, EventDates, LipEvent, PhenologyRecord, PriorConfig};
pub use robust::{huber, HuberParams};
pub use season::{DayIndex, WinterSeason};
pub use synth::{SynthConfig, SynthDataset, SynthTruth};
pub use timeline::{TimelinePoint, WinterTimeline};

use thiserror::Error;

/// Any failure of the library, by origin.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Season(#[from] season::SeasonError),
    #[error(transparent)]
    Ingest(#[from] ingest::IngestError),
    #[error(transparent)]
    Classify(#[from] classify::ClassifyError),
    #[error(transparent)]
    Timeline(#[from] timeline::TimelineError),
    #[error(transparent)]
    Phenology(#[from] phenology::PhenologyError),
    #[error(transparent)]
    Climate(#[from] climate::ClimateError),
    #[error(transparent)]
    Synth(#[from] synth::SynthError),
    #[error("{0}")]
    Invalid(String),
}

impl Error {
    /// Whether the failure came from the file system rather than the data.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Ingest(e) => e.is_io(),
            Error::Timeline(timeline::TimelineError::Ingest(e)) => e.is_io(),
            _ => false,
        }
    }
}
