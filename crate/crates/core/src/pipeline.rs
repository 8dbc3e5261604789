//! Glue from labelled pixel samples to phenology records.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::classify::{predict, training_subset, IceClass, LinearModel};
use crate::ingest::PixelSample;
use crate::phenology::{apply_overrides, fit_phenology, Overrides, PhenologyRecord, PriorConfig};
use crate::season::WinterSeason;
use crate::timeline::{
    build_timeline, gaussian_smooth, Acquisition, PixelState, WinterTimeline, DEFAULT_MIN_CLOUD_FREE,
    DEFAULT_SIGMA_DAYS, DEFAULT_WINDOW_DAYS,
};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimelineSettings {
    pub min_cloud_free: f64,
    pub sigma_days: f64,
    pub window_days: f64,
}

impl Default for TimelineSettings {
    fn default() -> Self {
        Self {
            min_cloud_free: DEFAULT_MIN_CLOUD_FREE,
            sigma_days: DEFAULT_SIGMA_DAYS,
            window_days: DEFAULT_WINDOW_DAYS,
        }
    }
}

impl TimelineSettings {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.min_cloud_free) {
            return Err(format!("min_cloud_free must be in [0, 1], got {}", self.min_cloud_free));
        }
        if !(self.sigma_days > 0.0 && self.sigma_days.is_finite()) {
            return Err(format!("sigma must be positive, got {}", self.sigma_days));
        }
        if !(self.window_days >= 0.0 && self.window_days.is_finite()) {
            return Err(format!("window must be non-negative, got {}", self.window_days));
        }
        Ok(())
    }
}

/// Clear, labelled samples; at most `max` of them, drawn by seeded shuffle
/// and returned in input order.
pub fn training_sample(samples: &[PixelSample], max: usize, seed: u64) -> Vec<&PixelSample> {
    let pool = training_subset(samples);
    if pool.len() <= max {
        return pool;
    }
    let mut idx: Vec<usize> = (0..pool.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    idx.truncate(max);
    idx.sort_unstable();
    idx.into_iter().map(|i| pool[i]).collect()
}

pub fn classify_all(model: &LinearModel, samples: &[PixelSample]) -> Result<Vec<IceClass>, Error> {
    samples
        .par_iter()
        .map(|s| predict(model, s).map_err(Error::from))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

pub type AcquisitionSet = BTreeMap<(String, WinterSeason), Vec<Acquisition>>;

/// Group predictions into per-date acquisitions, pixels ordered by id.
/// Samples outside any winter season are ignored.
pub fn acquisitions(samples: &[PixelSample], predictions: &[IceClass]) -> Result<AcquisitionSet, Error> {
    if samples.len() != predictions.len() {
        return Err(Error::Invalid(format!(
            "{} samples but {} predictions",
            samples.len(),
            predictions.len()
        )));
    }
    let mut grouped: BTreeMap<(&str, chrono::NaiveDate), BTreeMap<u32, PixelState>> = BTreeMap::new();
    for (s, &p) in samples.iter().zip(predictions) {
        if WinterSeason::containing(s.date).is_none() {
            continue;
        }
        let state = if s.cloudy { PixelState::Cloudy } else { PixelState::Clear(p) };
        if grouped.entry((&s.lake_id, s.date)).or_default().insert(s.pixel_id, state).is_some() {
            return Err(Error::Invalid(format!(
                "pixel {} of {} appears twice on {}",
                s.pixel_id, s.lake_id, s.date
            )));
        }
    }
    let mut out = AcquisitionSet::new();
    for ((lake, date), pixels) in grouped {
        let season = WinterSeason::containing(date).expect("filtered above");
        out.entry((lake.to_string(), season)).or_default().push(Acquisition {
            date,
            pixels: pixels.into_values().collect(),
        });
    }
    Ok(out)
}

/// Raw and smoothed timeline per lake-winter.
pub fn timelines(
    acqs: &AcquisitionSet,
    settings: &TimelineSettings,
) -> Result<Vec<(WinterTimeline, WinterTimeline)>, Error> {
    acqs.par_iter()
        .map(|((lake, season), list)| {
            let raw = build_timeline(lake, list, *season, settings.min_cloud_free)?;
            let smooth = gaussian_smooth(&raw, settings.sigma_days, settings.window_days);
            Ok((raw, smooth))
        })
        .collect::<Vec<Result<_, Error>>>()
        .into_iter()
        .collect()
}

/// Fit every smoothed timeline, then apply any manual corrections.
pub fn fit_all(
    smoothed: &[&WinterTimeline],
    prior: &PriorConfig,
    overrides: &Overrides,
) -> Result<Vec<PhenologyRecord>, Error> {
    smoothed
        .par_iter()
        .map(|tl| {
            let rec = fit_phenology(tl, prior);
            match overrides.get(&(tl.lake_id.clone(), tl.season)) {
                Some((events, note)) => apply_overrides(&rec, events, note).map_err(Error::from),
                None => Ok(rec),
            }
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}
