//! Per-winter non-frozen percentage timelines.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use chrono::NaiveDate;
use thiserror::Error;

use crate::classify::IceClass;
use crate::ingest::{cloud_free_fraction, CloudMask, IngestError};
use crate::season::{DayIndex, SeasonError, WinterSeason};

pub const DEFAULT_MIN_CLOUD_FREE: f64 = 0.30;
pub const DEFAULT_SIGMA_DAYS: f64 = 0.6;
pub const DEFAULT_WINDOW_DAYS: f64 = 3.0;

pub const TIMELINE_HEADER: [&str; 8] = [
    "lake_id",
    "winter",
    "date",
    "day_index",
    "nf_percent",
    "cloud_free",
    "n_pixels",
    "smoothed",
];

#[derive(Debug, Error)]
pub enum TimelineError {
    #[error("no usable pixels")]
    NoPixels,
    #[error("{got} predictions for {expected} clean pixels")]
    PredictionCount { expected: usize, got: usize },
    #[error("more than one acquisition on {0}")]
    DuplicateDate(NaiveDate),
    #[error(transparent)]
    Season(#[from] SeasonError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("line {line}: {message}")]
    Row { line: usize, message: String },
    #[error("timeline csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Invalid(String),
}

/// Classification of one clean pixel in one acquisition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PixelState {
    Cloudy,
    Clear(IceClass),
}

/// All clean pixels of one lake on one date.
#[derive(Debug, Clone, PartialEq)]
pub struct Acquisition {
    pub date: NaiveDate,
    pub pixels: Vec<PixelState>,
}

impl Acquisition {
    /// Combine a cloud mask with one prediction per clean pixel (predictions
    /// under clouds are discarded).
    pub fn from_mask(
        date: NaiveDate,
        clean_pixels: &[usize],
        mask: &CloudMask,
        predictions: &[IceClass],
    ) -> Result<Self, TimelineError> {
        if predictions.len() != clean_pixels.len() {
            return Err(TimelineError::PredictionCount {
                expected: clean_pixels.len(),
                got: predictions.len(),
            });
        }
        // Validates ids against the mask.
        cloud_free_fraction(clean_pixels, mask)?;
        let pixels = clean_pixels
            .iter()
            .zip(predictions)
            .map(|(&p, &c)| {
                if mask.is_cloudy(p) == Some(true) {
                    PixelState::Cloudy
                } else {
                    PixelState::Clear(c)
                }
            })
            .collect();
        Ok(Self { date, pixels })
    }

    pub fn clear_predictions(&self) -> impl Iterator<Item = IceClass> + '_ {
        self.pixels.iter().filter_map(|p| match p {
            PixelState::Clear(c) => Some(*c),
            PixelState::Cloudy => None,
        })
    }

    pub fn cloud_free(&self) -> Result<f64, TimelineError> {
        if self.pixels.is_empty() {
            return Err(TimelineError::NoPixels);
        }
        Ok(self.clear_predictions().count() as f64 / self.pixels.len() as f64)
    }
}

/// Percentage of the given pixels classified frozen.
pub fn frozen_percent(predictions: &[IceClass]) -> Result<f64, TimelineError> {
    if predictions.is_empty() {
        return Err(TimelineError::NoPixels);
    }
    let frozen = predictions.iter().filter(|&&c| c == IceClass::Frozen).count();
    Ok(100.0 * frozen as f64 / predictions.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimelinePoint {
    pub day: DayIndex,
    pub nf_percent: f64,
    pub cloud_free: f64,
    pub n_pixels: u32,
}

impl TimelinePoint {
    pub fn frozen_percent(&self) -> f64 {
        100.0 - self.nf_percent
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WinterTimeline {
    pub lake_id: String,
    pub season: WinterSeason,
    points: Vec<TimelinePoint>,
}

impl WinterTimeline {
    /// Points must be strictly day-ascending and inside the season.
    pub fn new(
        lake_id: impl Into<String>,
        season: WinterSeason,
        points: Vec<TimelinePoint>,
    ) -> Result<Self, TimelineError> {
        if points.windows(2).any(|p| p[1].day <= p[0].day) {
            return Err(TimelineError::Invalid("timeline days must strictly increase".into()));
        }
        if let Some(last) = points.last() {
            if last.day.0 >= season.len() {
                return Err(TimelineError::Invalid(format!(
                    "day {} outside winter {season}",
                    last.day
                )));
            }
        }
        if points
            .iter()
            .any(|p| !(0.0..=100.0).contains(&p.nf_percent) || !(0.0..=1.0).contains(&p.cloud_free))
        {
            return Err(TimelineError::Invalid("percentages out of range".into()));
        }
        Ok(Self {
            lake_id: lake_id.into(),
            season,
            points,
        })
    }

    pub fn points(&self) -> &[TimelinePoint] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn date_of(&self, p: &TimelinePoint) -> NaiveDate {
        self.season.date_of(p.day).expect("validated in new")
    }
}

/// Keep acquisitions at least `min_cloud_free` clear, one point per date.
pub fn build_timeline(
    lake_id: &str,
    acquisitions: &[Acquisition],
    season: WinterSeason,
    min_cloud_free: f64,
) -> Result<WinterTimeline, TimelineError> {
    let mut by_date: BTreeMap<NaiveDate, &Acquisition> = BTreeMap::new();
    for a in acquisitions {
        season.day_of_winter(a.date)?;
        if by_date.insert(a.date, a).is_some() {
            return Err(TimelineError::DuplicateDate(a.date));
        }
    }
    let mut points = Vec::new();
    for (date, acq) in by_date {
        let cloud_free = acq.cloud_free()?;
        if cloud_free < min_cloud_free {
            continue;
        }
        let clear: Vec<IceClass> = acq.clear_predictions().collect();
        let frozen = frozen_percent(&clear)?;
        points.push(TimelinePoint {
            day: season.day_of_winter(date)?,
            nf_percent: 100.0 - frozen,
            cloud_free,
            n_pixels: clear.len() as u32,
        });
    }
    WinterTimeline::new(lake_id, season, points)
}

/// Gaussian-weighted mean of the admitted points within half a window of
/// each point. Gaps are not filled.
pub fn gaussian_smooth(tl: &WinterTimeline, sigma_days: f64, window_days: f64) -> WinterTimeline {
    let half = window_days / 2.0;
    let two_var = 2.0 * sigma_days * sigma_days;
    let pts = tl.points();
    let smoothed = pts
        .iter()
        .map(|p| {
            let mut num = 0.0;
            let mut den = 0.0;
            for q in pts {
                let d = q.day.days_since(p.day) as f64;
                if d.abs() <= half {
                    let w = (-(d * d) / two_var).exp();
                    num += w * q.nf_percent;
                    den += w;
                }
            }
            TimelinePoint {
                nf_percent: (num / den).clamp(0.0, 100.0),
                ..*p
            }
        })
        .collect();
    WinterTimeline {
        lake_id: tl.lake_id.clone(),
        season: tl.season,
        points: smoothed,
    }
}

/// Raw and smoothed timelines as read back from CSV, keyed by lake and
/// winter.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TimelineSet {
    pub raw: BTreeMap<(String, WinterSeason), WinterTimeline>,
    pub smoothed: BTreeMap<(String, WinterSeason), WinterTimeline>,
}

/// One row per point: all raw rows of a timeline followed by its smoothed rows.
pub fn write_timelines<W: Write>(
    mut w: W,
    pairs: &[(WinterTimeline, WinterTimeline)],
) -> Result<(), TimelineError> {
    let io = |e| TimelineError::Csv(csv::Error::from(e));
    writeln!(w, "{}", TIMELINE_HEADER.join(",")).map_err(io)?;
    for (raw, smooth) in pairs {
        for (tl, flag) in [(raw, 0u8), (smooth, 1u8)] {
            for p in tl.points() {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{}",
                    tl.lake_id,
                    tl.season,
                    tl.date_of(p).format("%Y-%m-%d"),
                    p.day,
                    p.nf_percent,
                    p.cloud_free,
                    p.n_pixels,
                    flag
                )
                .map_err(io)?;
            }
        }
    }
    Ok(())
}

pub fn read_timelines<R: Read>(reader: R) -> Result<TimelineSet, TimelineError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.records();
    let header = records
        .next()
        .ok_or_else(|| TimelineError::Invalid("missing header row".into()))??;
    if header.iter().ne(TIMELINE_HEADER.iter().copied()) {
        return Err(TimelineError::Invalid(format!(
            "expected header {}",
            TIMELINE_HEADER.join(",")
        )));
    }
    type Points = BTreeMap<(String, WinterSeason), Vec<TimelinePoint>>;
    let mut raw: Points = BTreeMap::new();
    let mut smooth: Points = BTreeMap::new();
    for rec in records {
        let rec = rec?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let err = |message: String| TimelineError::Row { line, message };
        if rec.len() != TIMELINE_HEADER.len() {
            return Err(err(format!("expected {} fields, found {}", TIMELINE_HEADER.len(), rec.len())));
        }
        let season: WinterSeason = rec[1].parse().map_err(|e: SeasonError| err(e.to_string()))?;
        let date = NaiveDate::parse_from_str(&rec[2], "%Y-%m-%d").map_err(|_| err(format!("bad date {:?}", &rec[2])))?;
        let day = season.day_of_winter(date).map_err(|e| err(e.to_string()))?;
        let stated: u32 = rec[3].parse().map_err(|_| err(format!("bad day_index {:?}", &rec[3])))?;
        if stated != day.0 {
            return Err(err(format!("day_index {stated} does not match date {date}")));
        }
        let num = |i: usize| -> Result<f64, TimelineError> {
            rec[i].parse::<f64>().map_err(|_| err(format!("column {}: {:?} is not a number", TIMELINE_HEADER[i], &rec[i])))
        };
        let point = TimelinePoint {
            day,
            nf_percent: num(4)?,
            cloud_free: num(5)?,
            n_pixels: rec[6].parse().map_err(|_| err(format!("bad n_pixels {:?}", &rec[6])))?,
        };
        let target = match &rec[7] {
            "0" => &mut raw,
            "1" => &mut smooth,
            other => return Err(err(format!("smoothed must be 0 or 1, got {other:?}"))),
        };
        target.entry((rec[0].to_string(), season)).or_default().push(point);
    }
    let finish = |m: Points| -> Result<BTreeMap<(String, WinterSeason), WinterTimeline>, TimelineError> {
        m.into_iter()
            .map(|((lake, season), pts)| {
                let tl = WinterTimeline::new(lake.clone(), season, pts)?;
                Ok(((lake, season), tl))
            })
            .collect()
    };
    Ok(TimelineSet {
        raw: finish(raw)?,
        smoothed: finish(smooth)?,
    })
}
