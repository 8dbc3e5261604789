//! Lake ice phenology: freeze-up / break-up start and end dates.
//!
//! Candidates for each event are the threshold crossings of the smoothed
//! timeline. Among all candidate tuples respecting the FUS ≤ FUE ≤ BUS ≤ BUE
//! order and the two-week transition cap, the one whose piecewise-linear
//! "U with wings" curve best explains the observations is chosen. The
//! misfit is the Huber penalty summed over acquisitions (residuals in
//! percentage points) divided by a product of wide Gaussian priors on the
//! four dates.

mod candidates;
mod fit;
mod record;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::season::{DayIndex, SeasonError};

pub use candidates::{extract_candidates, EventCandidates};
pub use fit::{
    fit_loss, fit_phenology, fit_phenology_with, model_nf, model_nf_at, prior_weight, FitOptions, MonthDay,
    PriorConfig, ResolvedPrior,
};
pub use record::{
    apply_overrides, derive_durations, parse_overrides, read_records_json, write_records_json, Overrides,
    PhenologyRecord,
};

/// Longest allowed freeze-up (FUE − FUS) or break-up (BUE − BUS), days.
pub const MAX_TRANSITION_DAYS: u32 = 14;

#[derive(Debug, Error)]
pub enum PhenologyError {
    #[error("event dates out of order: {0}")]
    Unordered(String),
    #[error("{event} transition lasts {days} days, more than {MAX_TRANSITION_DAYS}")]
    TooLong { event: &'static str, days: u32 },
    #[error("invalid prior: {0}")]
    Prior(String),
    #[error(transparent)]
    Season(#[from] SeasonError),
    #[error("line {line}: {message}")]
    Row { line: usize, message: String },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LipEvent {
    #[serde(rename = "FUS")]
    Fus,
    #[serde(rename = "FUE")]
    Fue,
    #[serde(rename = "BUS")]
    Bus,
    #[serde(rename = "BUE")]
    Bue,
}

impl LipEvent {
    pub const ALL: [LipEvent; 4] = [LipEvent::Fus, LipEvent::Fue, LipEvent::Bus, LipEvent::Bue];

    pub fn as_str(self) -> &'static str {
        match self {
            LipEvent::Fus => "FUS",
            LipEvent::Fue => "FUE",
            LipEvent::Bus => "BUS",
            LipEvent::Bue => "BUE",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for LipEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LipEvent {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "FUS" => Ok(LipEvent::Fus),
            "FUE" => Ok(LipEvent::Fue),
            "BUS" => Ok(LipEvent::Bus),
            "BUE" => Ok(LipEvent::Bue),
            _ => Err(format!("unknown event {s:?}")),
        }
    }
}

/// A complete, ordered set of the four event days.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventDates {
    fus: DayIndex,
    fue: DayIndex,
    bus: DayIndex,
    bue: DayIndex,
}

impl EventDates {
    /// Checks chronological order only.
    pub fn new(fus: DayIndex, fue: DayIndex, bus: DayIndex, bue: DayIndex) -> Result<Self, PhenologyError> {
        if !(fus <= fue && fue <= bus && bus <= bue) {
            return Err(PhenologyError::Unordered(format!(
                "FUS {fus}, FUE {fue}, BUS {bus}, BUE {bue}"
            )));
        }
        Ok(Self { fus, fue, bus, bue })
    }

    /// Order plus the two-week cap on both transitions.
    pub fn feasible(fus: DayIndex, fue: DayIndex, bus: DayIndex, bue: DayIndex) -> Result<Self, PhenologyError> {
        let d = Self::new(fus, fue, bus, bue)?;
        if fue.0 - fus.0 > MAX_TRANSITION_DAYS {
            return Err(PhenologyError::TooLong {
                event: "freeze-up",
                days: fue.0 - fus.0,
            });
        }
        if bue.0 - bus.0 > MAX_TRANSITION_DAYS {
            return Err(PhenologyError::TooLong {
                event: "break-up",
                days: bue.0 - bus.0,
            });
        }
        Ok(d)
    }

    pub fn fus(&self) -> DayIndex {
        self.fus
    }
    pub fn fue(&self) -> DayIndex {
        self.fue
    }
    pub fn bus(&self) -> DayIndex {
        self.bus
    }
    pub fn bue(&self) -> DayIndex {
        self.bue
    }

    pub fn get(&self, e: LipEvent) -> DayIndex {
        self.as_array()[e.index()]
    }

    pub fn as_array(&self) -> [DayIndex; 4] {
        [self.fus, self.fue, self.bus, self.bue]
    }
}
