//! Ground-truthed synthetic lakes: per-pixel band samples, cloud masks,
//! station meteorology and the true event dates.
//!
//! Each winter a latent frozen-percentage curve (open, linear freeze-up,
//! frozen plateau, linear break-up, open) is drawn with its onsets from the
//! phenology prior. Bounded noise is added, the curve is quantised to whole
//! pixels, and the true event dates are the threshold crossings of that
//! pixel-level truth, using the same rules the estimator applies.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::climate::{ClimateSeries, DailyRecord};
use crate::ingest::{Label, PixelSample};
use crate::phenology::{EventDates, PriorConfig};
use crate::season::{DayIndex, SeasonError, WinterSeason};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synth config: {0}")]
    Config(String),
    #[error("no admissible truth for {lake} {season} after {tries} draws")]
    Unsatisfiable { lake: String, season: WinterSeason, tries: usize },
    #[error(transparent)]
    Season(#[from] SeasonError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthLake {
    pub id: String,
    pub pixels: usize,
}

/// MWT = intercept + slope · (CFD − 114) + N(0, noise²), per lake-winter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClimateLink {
    pub intercept_c: f64,
    pub slope_c_per_day: f64,
    pub noise_c: f64,
}

impl Default for ClimateLink {
    fn default() -> Self {
        Self {
            intercept_c: -2.0,
            slope_c_per_day: -0.04,
            noise_c: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthConfig {
    pub lakes: Vec<SynthLake>,
    pub winters: Vec<i32>,
    pub bands: usize,
    /// Distance between class means in units of the per-band std.
    pub separation: f64,
    /// Probability a day is too cloudy to admit (< 30 % clear).
    pub cloud_rate: f64,
    /// Probability a cloudy day's mask reports it clear.
    pub cloud_fn_rate: f64,
    /// Per-pixel probability the recorded label is flipped.
    pub label_noise: f64,
    /// Half-width of the uniform noise on the latent curve, percentage points.
    pub fraction_noise: f64,
    /// Multiplier on the freeze-up / break-up ramp lengths, which are drawn
    /// up to twice the gap between the prior means. 0 gives step changes.
    pub ramp_scale: f64,
    pub prior: PriorConfig,
    pub climate: ClimateLink,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            lakes: vec![
                SynthLake {
                    id: "sils".into(),
                    pixels: 33,
                },
                SynthLake {
                    id: "silvaplana".into(),
                    pixels: 24,
                },
                SynthLake {
                    id: "st_moritz".into(),
                    pixels: 12,
                },
            ],
            winters: (2000..2020).collect(),
            bands: 5,
            separation: 4.0,
            cloud_rate: 0.4,
            cloud_fn_rate: 0.02,
            label_noise: 0.02,
            fraction_noise: 2.0,
            ramp_scale: 1.0,
            prior: PriorConfig::default(),
            climate: ClimateLink::default(),
            seed: 42,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::Config(m));
        for (name, v) in [
            ("cloud_rate", self.cloud_rate),
            ("cloud_fn_rate", self.cloud_fn_rate),
            ("label_noise", self.label_noise),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} must be in [0, 1], got {v}"));
            }
        }
        if !(self.separation > 0.0 && self.separation.is_finite()) {
            return bad(format!("separation must be positive, got {}", self.separation));
        }
        if !(0.0..=10.0).contains(&self.fraction_noise) {
            return bad(format!("fraction_noise must be in [0, 10], got {}", self.fraction_noise));
        }
        if !(0.0..=2.0).contains(&self.ramp_scale) {
            return bad(format!("ramp_scale must be in [0, 2], got {}", self.ramp_scale));
        }
        if self.bands == 0 {
            return bad("need at least one band".into());
        }
        if self.lakes.is_empty() || self.winters.is_empty() {
            return bad("need at least one lake and one winter".into());
        }
        let mut ids = std::collections::BTreeSet::new();
        for l in &self.lakes {
            if l.pixels == 0 {
                return bad(format!("lake {} has no pixels", l.id));
            }
            if l.id.is_empty() || l.id.contains(',') || !ids.insert(&l.id) {
                return bad(format!("lake id {:?} is empty, contains a comma or repeats", l.id));
            }
        }
        for &y in &self.winters {
            WinterSeason::new(y)?;
        }
        Ok(())
    }
}

/// True state of one lake-winter.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthTruth {
    pub lake_id: String,
    pub season: WinterSeason,
    pub dates: EventDates,
    /// Per day of the season, in [0, 1].
    pub daily_frozen_fraction: Vec<f64>,
    frozen_count: Vec<usize>,
    /// Pixels freeze in this order and melt in reverse.
    pixel_order: Vec<usize>,
}

impl SynthTruth {
    pub fn is_frozen(&self, day: usize, pixel: usize) -> bool {
        let rank = self.pixel_order.iter().position(|&p| p == pixel).expect("pixel of this lake");
        rank < self.frozen_count[day]
    }

    fn frozen_set(&self, day: usize) -> Vec<bool> {
        let mut out = vec![false; self.pixel_order.len()];
        for &p in &self.pixel_order[..self.frozen_count[day]] {
            out[p] = true;
        }
        out
    }

    pub fn cfd_days(&self) -> i64 {
        self.dates.bus().days_since(self.dates.fue())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthWinter {
    pub samples: Vec<PixelSample>,
    pub truth: SynthTruth,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthDataset {
    pub samples: Vec<PixelSample>,
    pub truths: Vec<SynthTruth>,
    /// One station per lake, keyed by lake id.
    pub climate: BTreeMap<String, ClimateSeries>,
}

const STREAM_TRUTH: u64 = 1;
const STREAM_CLIMATE: u64 = 2;

/// Independent stream per (seed, lake, year, purpose).
fn sub_seed(seed: u64, lake: &str, year: i32, stream: u64) -> u64 {
    // FNV-1a over the lake id, then splitmix64 finalisation.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in lake.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    let mut z = seed ^ h.rotate_left(17) ^ (year as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ stream.rotate_left(41);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Latent frozen percentage for fractional onsets (a, b, c, d).
fn latent_frozen(t: f64, [a, b, c, d]: [f64; 4]) -> f64 {
    if t <= a {
        0.0
    } else if t < b {
        100.0 * (t - a) / (b - a)
    } else if t <= c {
        100.0
    } else if t < d {
        100.0 * (d - t) / (d - c)
    } else {
        0.0
    }
}

/// First threshold crossings of a daily frozen-percentage series, in event
/// order.
fn crossings(frozen: &[f64]) -> Option<[DayIndex; 4]> {
    let mut out = [DayIndex(0); 4];
    let mut from = 1;
    let rules: [&dyn Fn(f64, f64) -> bool; 4] = [
        &|prev, cur| cur >= 30.0 && prev < 30.0,
        &|prev, cur| cur >= 70.0 && prev < 70.0,
        &|prev, cur| 100.0 - cur >= 30.0 && 100.0 - prev < 30.0,
        &|prev, cur| 100.0 - cur >= 70.0 && 100.0 - prev < 70.0,
    ];
    for (slot, rule) in out.iter_mut().zip(rules) {
        let t = (from..frozen.len()).find(|&t| rule(frozen[t - 1], frozen[t]))?;
        *slot = DayIndex(t as u32);
        from = t;
    }
    Some(out)
}

const MAX_TRUTH_DRAWS: usize = 1000;
const EDGE_MARGIN: f64 = 10.0;
const MIN_PLATEAU: f64 = 10.0;

fn draw_truth(
    cfg: &SynthConfig,
    lake: &SynthLake,
    season: WinterSeason,
    rng: &mut ChaCha8Rng,
) -> Result<SynthTruth, SynthError> {
    let prior = cfg.prior.resolve(season);
    let len = season.len() as usize;
    let onset = Normal::new(0.0, prior.sigma).expect("positive sigma");
    let freeze_max = 2.0 * cfg.ramp_scale * (prior.means[1] - prior.means[0]);
    let break_max = 2.0 * cfg.ramp_scale * (prior.means[3] - prior.means[2]);
    let mut order: Vec<usize> = (0..lake.pixels).collect();
    order.shuffle(rng);
    for _ in 0..MAX_TRUTH_DRAWS {
        let a = prior.means[0] + onset.sample(rng);
        let b = a + rng.random_range(0.0..=freeze_max);
        let c = prior.means[2] + onset.sample(rng);
        let d = c + rng.random_range(0.0..=break_max);
        if a < EDGE_MARGIN || d > len as f64 - 1.0 - EDGE_MARGIN || c - b < MIN_PLATEAU {
            continue;
        }
        let mid = ((b + c) / 2.0).floor() as usize;
        let n = lake.pixels as f64;
        let mut counts: Vec<usize> = (0..len)
            .map(|t| {
                let noise = rng.random_range(-1.0..=1.0) * cfg.fraction_noise;
                let f = (latent_frozen(t as f64, [a, b, c, d]) + noise).clamp(0.0, 100.0);
                (f * n / 100.0).round() as usize
            })
            .collect();
        // Ice only grows before mid-winter and only shrinks after.
        for t in 1..len {
            if t <= mid {
                counts[t] = counts[t].max(counts[t - 1]);
            } else if t > mid + 1 {
                counts[t] = counts[t].min(counts[t - 1]);
            }
        }
        let frozen_pct: Vec<f64> = counts.iter().map(|&k| 100.0 * k as f64 / n).collect();
        let Some([fus, fue, bus, bue]) = crossings(&frozen_pct) else {
            continue;
        };
        let Ok(dates) = EventDates::feasible(fus, fue, bus, bue) else {
            continue;
        };
        return Ok(SynthTruth {
            lake_id: lake.id.clone(),
            season,
            dates,
            daily_frozen_fraction: counts.iter().map(|&k| k as f64 / n).collect(),
            frozen_count: counts,
            pixel_order: order,
        });
    }
    Err(SynthError::Unsatisfiable {
        lake: lake.id.clone(),
        season,
        tries: MAX_TRUTH_DRAWS,
    })
}

/// Band-space cluster centres along the all-ones direction.
struct Clusters {
    frozen: f64,
    cloud: f64,
    scale: f64,
}

impl Clusters {
    fn new(cfg: &SynthConfig) -> Self {
        Self {
            frozen: cfg.separation,
            cloud: 1.5 * cfg.separation + 1.0,
            scale: 1.0 / (cfg.bands as f64).sqrt(),
        }
    }

    fn draw(&self, centre: f64, bands: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let unit = Normal::new(0.0, 1.0).expect("unit normal");
        (0..bands).map(|_| centre * self.scale + unit.sample(rng)).collect()
    }
}

/// Truth plus one sample per pixel per day for one lake-winter.
pub fn generate_winter(cfg: &SynthConfig, lake: &SynthLake, season: WinterSeason) -> Result<SynthWinter, SynthError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(cfg.seed, &lake.id, season.start_year(), STREAM_TRUTH));
    let truth = draw_truth(cfg, lake, season, &mut rng)?;
    let clusters = Clusters::new(cfg);
    let n = lake.pixels;
    let mut samples = Vec::with_capacity(n * season.len() as usize);
    let mut ids: Vec<usize> = (0..n).collect();
    for (day, date) in season.days().enumerate() {
        let frozen = truth.frozen_set(day);
        let cloudy_day = rng.random_bool(cfg.cloud_rate);
        // Clear share of the lake: below 30 % on cloudy days.
        let clear = if cloudy_day {
            (rng.random_range(0.0..0.3) * n as f64).floor() as usize
        } else {
            let c = (rng.random_range(0.8..=1.0) * n as f64).ceil() as usize;
            c.clamp(((0.3 * n as f64).ceil() as usize).max(1), n)
        };
        let mask_missed = cloudy_day && rng.random_bool(cfg.cloud_fn_rate);
        ids.shuffle(&mut rng);
        let mut under_cloud = vec![false; n];
        for &p in &ids[clear..] {
            under_cloud[p] = true;
        }
        for p in 0..n {
            let truly_frozen = frozen[p];
            let centre = if under_cloud[p] {
                clusters.cloud
            } else if truly_frozen {
                clusters.frozen
            } else {
                0.0
            };
            let bands = clusters.draw(centre, cfg.bands, &mut rng);
            let flipped = rng.random_bool(cfg.label_noise);
            let label = match truly_frozen != flipped {
                true => Label::Frozen,
                false => Label::NonFrozen,
            };
            samples.push(PixelSample {
                lake_id: lake.id.clone(),
                date,
                pixel_id: p as u32,
                cloudy: under_cloud[p] && !mask_missed,
                label,
                bands,
            });
        }
    }
    Ok(SynthWinter { samples, truth })
}

/// Seasonal temperature shape with its coldest point in mid-January.
fn base_temperature(day: usize) -> f64 {
    -8.0 * (2.0 * std::f64::consts::PI * (day as f64 - 135.0) / 365.0).cos() + 2.0
}

/// Station series for one lake-winter whose mean winter temperature is
/// tied to the true closed-freeze duration.
fn generate_climate(cfg: &SynthConfig, truth: &SynthTruth) -> Vec<(NaiveDate, DailyRecord)> {
    let season = truth.season;
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(cfg.seed, &truth.lake_id, season.start_year(), STREAM_CLIMATE));
    let link = cfg.climate;
    let anomaly = if link.noise_c > 0.0 {
        Normal::new(0.0, link.noise_c).expect("positive").sample(&mut rng)
    } else {
        0.0
    };
    let target = link.intercept_c + link.slope_c_per_day * (truth.cfd_days() as f64 - 114.0) + anomaly;
    let daily = Normal::new(0.0, 2.5).expect("positive");
    let rain = Exp::new(1.0 / 6.0).expect("positive");
    let len = season.len() as usize;
    let raw: Vec<f64> = (0..len).map(|d| base_temperature(d) + daily.sample(&mut rng)).collect();
    let offset = target - raw.iter().sum::<f64>() / len as f64;
    season
        .days()
        .zip(raw)
        .enumerate()
        .map(|(d, (date, t))| {
            let precip = if rng.random_bool(0.35) { rain.sample(&mut rng) } else { 0.0 };
            let daylight = 10.0 + 2.5 * (2.0 * std::f64::consts::PI * (d as f64 - 112.0) / 365.0).cos().abs();
            let sunshine = rng.random_range(0.0..=1.0) * (daylight - 2.0);
            let wind = 8.0 + rng.random_range(0.0..6.0) + (t + offset).abs() * 0.2;
            let round = |x: f64, k: f64| (x * k).round() / k;
            (
                date,
                DailyRecord {
                    tmean_c: Some(t + offset),
                    precip_mm: Some(round(precip, 10.0)),
                    sunshine_h: Some(round(sunshine, 10.0)),
                    wind_kmh: Some(round(wind, 10.0)),
                },
            )
        })
        .collect()
}

/// All lakes × winters, generated in parallel and assembled in (lake,
/// winter) order.
pub fn generate_dataset(cfg: &SynthConfig) -> Result<SynthDataset, SynthError> {
    cfg.validate()?;
    let seasons = cfg
        .winters
        .iter()
        .map(|&y| WinterSeason::new(y))
        .collect::<Result<Vec<_>, _>>()?;
    let jobs: Vec<(&SynthLake, WinterSeason)> = cfg
        .lakes
        .iter()
        .flat_map(|l| seasons.iter().map(move |&s| (l, s)))
        .collect();
    let winters = jobs
        .par_iter()
        .map(|&(lake, season)| {
            let w = generate_winter(cfg, lake, season)?;
            let climate = generate_climate(cfg, &w.truth);
            Ok((w, climate))
        })
        .collect::<Vec<Result<_, SynthError>>>()
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let mut samples = Vec::new();
    let mut truths = Vec::new();
    let mut climate: BTreeMap<String, ClimateSeries> = BTreeMap::new();
    for (w, days) in winters {
        let series = climate
            .entry(w.truth.lake_id.clone())
            .or_insert_with(|| ClimateSeries::new(format!("{}_station", w.truth.lake_id)));
        for (date, rec) in days {
            series.insert(date, rec);
        }
        samples.extend(w.samples);
        truths.push(w.truth);
    }
    Ok(SynthDataset {
        samples,
        truths,
        climate,
    })
}

#[derive(Serialize)]
struct TruthJson<'a> {
    lake_id: &'a str,
    winter: WinterSeason,
    fus: NaiveDate,
    fue: NaiveDate,
    bus: NaiveDate,
    bue: NaiveDate,
    daily_frozen_fraction: &'a [f64],
}

/// Pretty JSON array of truth records.
pub fn truth_json(truths: &[SynthTruth]) -> Result<String, SynthError> {
    let mut rows = Vec::with_capacity(truths.len());
    for t in truths {
        let [fus, fue, bus, bue] = t.dates.as_array();
        let d = |i| t.season.date_of(i);
        rows.push(TruthJson {
            lake_id: &t.lake_id,
            winter: t.season,
            fus: d(fus)?,
            fue: d(fue)?,
            bus: d(bus)?,
            bue: d(bue)?,
            daily_frozen_fraction: &t.daily_frozen_fraction,
        });
    }
    let mut s = serde_json::to_string_pretty(&rows).expect("plain data serialises");
    s.push('\n');
    Ok(s)
}
