//! Station meteorology, winter indicators, trends and correlations.

mod correlate;
mod indicators;
mod mad;
mod series;
mod stats;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::phenology::{LipEvent, PhenologyRecord};
use crate::season::WinterSeason;

pub use correlate::{correlate_events, pairing_plan, write_correlations, CorrelationRow, CORRELATION_HEADER};
pub use indicators::{afdd, compute_indicators, mwt, seasonal_aggregate, AggKind, Aggregate, Field, Indicator, Window, WinterIndicators};
pub use mad::{mad_compare, mad_summary, MadResult, MadSummary};
pub use series::{ClimateSeries, DailyRecord};
pub use stats::{lake_trends, linear_trend, pearson, write_trends, LinearFit, TrendResult, TREND_HEADER};

#[derive(Debug, Error, PartialEq)]
pub enum ClimateError {
    #[error("no {what} data in winter {season}")]
    NoData { what: String, season: WinterSeason },
    #[error("series lengths differ: {0} vs {1}")]
    Length(usize, usize),
    #[error("need at least 2 points, got {0}")]
    TooShort(usize),
    #[error("correlation undefined for constant input")]
    Constant,
    #[error("all points share one year; slope undefined")]
    SingleYear,
    #[error("no common days between the series")]
    NoCommonDays,
    #[error("{0}")]
    Io(String),
}

/// Quantities that trends and correlations are computed for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "FUS")]
    Fus,
    #[serde(rename = "FUE")]
    Fue,
    #[serde(rename = "BUS")]
    Bus,
    #[serde(rename = "BUE")]
    Bue,
    #[serde(rename = "ICD")]
    Icd,
    #[serde(rename = "CFD")]
    Cfd,
}

impl Metric {
    pub const ALL: [Metric; 6] = [Metric::Fus, Metric::Fue, Metric::Bus, Metric::Bue, Metric::Icd, Metric::Cfd];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Fus => "FUS",
            Metric::Fue => "FUE",
            Metric::Bus => "BUS",
            Metric::Bue => "BUE",
            Metric::Icd => "ICD",
            Metric::Cfd => "CFD",
        }
    }

    /// Day-of-winter index for events, day count for durations.
    pub fn value(self, r: &PhenologyRecord) -> Option<f64> {
        let ev = |e: LipEvent| r.get(e).map(|d| d.0 as f64);
        match self {
            Metric::Fus => ev(LipEvent::Fus),
            Metric::Fue => ev(LipEvent::Fue),
            Metric::Bus => ev(LipEvent::Bus),
            Metric::Bue => ev(LipEvent::Bue),
            Metric::Icd => r.icd_days.map(|d| d as f64),
            Metric::Cfd => r.cfd_days.map(|d| d as f64),
        }
    }
}

impl From<LipEvent> for Metric {
    fn from(e: LipEvent) -> Self {
        match e {
            LipEvent::Fus => Metric::Fus,
            LipEvent::Fue => Metric::Fue,
            LipEvent::Bus => Metric::Bus,
            LipEvent::Bue => Metric::Bue,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown metric {s:?}"))
    }
}
