use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{ClimateError, ClimateSeries, DailyRecord};
use crate::season::WinterSeason;

/// Part of a winter season an aggregate is taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Window {
    #[serde(rename = "full")]
    Full,
    /// Sep 1 – Dec 31.
    #[serde(rename = "S2D")]
    S2D,
    /// Jan 1 – May 31.
    #[serde(rename = "J2M")]
    J2M,
}

impl Window {
    pub fn bounds(self, season: WinterSeason) -> (NaiveDate, NaiveDate) {
        let y = season.start_year();
        let ymd = |y, m, d| NaiveDate::from_ymd_opt(y, m, d).expect("valid calendar day");
        match self {
            Window::Full => (season.first_day(), season.last_day()),
            Window::S2D => (season.first_day(), ymd(y, 12, 31)),
            Window::J2M => (ymd(y + 1, 1, 1), season.last_day()),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Window::Full => "full",
            Window::S2D => "S2D",
            Window::J2M => "J2M",
        }
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Window {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [Window::Full, Window::S2D, Window::J2M]
            .into_iter()
            .find(|w| w.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown window {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Tmean,
    Precip,
    Sunshine,
    Wind,
}

impl Field {
    fn get(self, r: &DailyRecord) -> Option<f64> {
        match self {
            Field::Tmean => r.tmean_c,
            Field::Precip => r.precip_mm,
            Field::Sunshine => r.sunshine_h,
            Field::Wind => r.wind_kmh,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Field::Tmean => "tmean_c",
            Field::Precip => "precip_mm",
            Field::Sunshine => "sunshine_h",
            Field::Wind => "wind_kmh",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggKind {
    Sum,
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Aggregate {
    pub value: f64,
    /// Days with a value for the field.
    pub days: usize,
}

fn values(series: &ClimateSeries, season: WinterSeason, window: Window, field: Field) -> Vec<f64> {
    let (a, b) = window.bounds(season);
    series.range(a, b).filter_map(|(_, r)| field.get(r)).collect()
}

/// Sum or mean of the available values in the window; missing days are
/// skipped.
pub fn seasonal_aggregate(
    series: &ClimateSeries,
    season: WinterSeason,
    window: Window,
    field: Field,
    kind: AggKind,
) -> Result<Aggregate, ClimateError> {
    let v = values(series, season, window, field);
    if v.is_empty() {
        return Err(ClimateError::NoData {
            what: format!("{} ({window})", field.name()),
            season,
        });
    }
    let sum: f64 = v.iter().sum();
    let value = match kind {
        AggKind::Sum => sum,
        AggKind::Mean => sum / v.len() as f64,
    };
    Ok(Aggregate { value, days: v.len() })
}

/// Mean winter temperature over Sep 1 – May 31.
pub fn mwt(series: &ClimateSeries, season: WinterSeason) -> Result<f64, ClimateError> {
    seasonal_aggregate(series, season, Window::Full, Field::Tmean, AggKind::Mean).map(|a| a.value)
}

/// Accumulated freezing degree-days as a positive magnitude.
pub fn afdd(series: &ClimateSeries, season: WinterSeason) -> Result<f64, ClimateError> {
    let v = values(series, season, Window::Full, Field::Tmean);
    if v.is_empty() {
        return Err(ClimateError::NoData {
            what: "tmean_c".into(),
            season,
        });
    }
    Ok(v.iter().filter(|&&t| t < 0.0).map(|t| -t).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Indicator {
    #[serde(rename = "MWT")]
    Mwt,
    #[serde(rename = "AFDD")]
    Afdd,
    #[serde(rename = "sunshine")]
    Sunshine,
    #[serde(rename = "precip")]
    Precip,
    #[serde(rename = "wind")]
    Wind,
}

impl Indicator {
    pub fn as_str(self) -> &'static str {
        match self {
            Indicator::Mwt => "MWT",
            Indicator::Afdd => "AFDD",
            Indicator::Sunshine => "sunshine",
            Indicator::Precip => "precip",
            Indicator::Wind => "wind",
        }
    }
}

impl fmt::Display for Indicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-winter climate summary. MWT and AFDD exist only for the full
/// window; sunshine and precipitation are totals, wind a mean. Entries
/// lacking data are absent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WinterIndicators {
    pub season: WinterSeason,
    pub values: BTreeMap<(Indicator, Window), Aggregate>,
}

impl WinterIndicators {
    pub fn get(&self, ind: Indicator, window: Window) -> Option<f64> {
        self.values.get(&(ind, window)).map(|a| a.value)
    }

    pub fn mwt_c(&self) -> Option<f64> {
        self.get(Indicator::Mwt, Window::Full)
    }

    pub fn afdd_c(&self) -> Option<f64> {
        self.get(Indicator::Afdd, Window::Full)
    }
}

pub fn compute_indicators(series: &ClimateSeries, season: WinterSeason) -> WinterIndicators {
    let mut values = BTreeMap::new();
    if let Ok(a) = seasonal_aggregate(series, season, Window::Full, Field::Tmean, AggKind::Mean) {
        values.insert((Indicator::Mwt, Window::Full), a);
        let freezing = afdd(series, season).expect("temperature present");
        values.insert(
            (Indicator::Afdd, Window::Full),
            Aggregate {
                value: freezing,
                days: a.days,
            },
        );
    }
    for window in [Window::Full, Window::S2D, Window::J2M] {
        for (ind, field, kind) in [
            (Indicator::Sunshine, Field::Sunshine, AggKind::Sum),
            (Indicator::Precip, Field::Precip, AggKind::Sum),
            (Indicator::Wind, Field::Wind, AggKind::Mean),
        ] {
            if let Ok(a) = seasonal_aggregate(series, season, window, field, kind) {
                values.insert((ind, window), a);
            }
        }
    }
    WinterIndicators { season, values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn series(days: &[((i32, u32, u32), DailyRecord)]) -> ClimateSeries {
        let mut s = ClimateSeries::new("SIA");
        for &((y, m, d), r) in days {
            s.insert(NaiveDate::from_ymd_opt(y, m, d).unwrap(), r);
        }
        s
    }

    fn t(v: f64) -> DailyRecord {
        DailyRecord {
            tmean_c: Some(v),
            ..Default::default()
        }
    }

    fn w() -> WinterSeason {
        WinterSeason::new(2010).unwrap()
    }

    #[test]
    fn closed_form_temperatures() {
        let s = series(&[((2010, 11, 1), t(-2.0)), ((2011, 1, 1), t(-3.0)), ((2011, 3, 1), t(4.0))]);
        assert!((mwt(&s, w()).unwrap() - (-1.0 / 3.0)).abs() < 1e-12);
        assert_eq!(afdd(&s, w()).unwrap(), 5.0);
        let one = series(&[((2010, 10, 1), t(5.0))]);
        assert_eq!(mwt(&one, w()).unwrap(), 5.0);
        assert_eq!(afdd(&one, w()).unwrap(), 0.0);
        // Outside the season is ignored.
        let summer = series(&[((2011, 7, 1), t(20.0))]);
        assert!(mwt(&summer, w()).is_err());
        assert!(afdd(&summer, w()).is_err());
    }

    #[test]
    fn window_sums() {
        let p = |v| DailyRecord {
            precip_mm: Some(v),
            wind_kmh: Some(12.0),
            ..Default::default()
        };
        let s = series(&[((2010, 9, 10), p(10.0)), ((2010, 12, 31), p(0.5)), ((2011, 2, 2), p(20.0))]);
        let agg = |win, f, k| seasonal_aggregate(&s, w(), win, f, k).unwrap();
        assert_eq!(agg(Window::S2D, Field::Precip, AggKind::Sum).value, 10.5);
        assert_eq!(agg(Window::J2M, Field::Precip, AggKind::Sum).value, 20.0);
        assert_eq!(agg(Window::Full, Field::Precip, AggKind::Sum).days, 3);
        assert_eq!(agg(Window::J2M, Field::Wind, AggKind::Mean).value, 12.0);
        assert!(seasonal_aggregate(&s, w(), Window::J2M, Field::Sunshine, AggKind::Sum).is_err());
        let ind = compute_indicators(&s, w());
        assert_eq!(ind.mwt_c(), None);
        assert_eq!(ind.get(Indicator::Precip, Window::S2D), Some(10.5));
    }

    proptest! {
        #[test]
        fn against_day_filter(temps in proptest::collection::vec(proptest::option::of(-25.0f64..20.0), 273)) {
            let season = w();
            let mut s = ClimateSeries::new("X");
            for (d, t) in season.days().zip(&temps) {
                s.insert(d, DailyRecord { tmean_c: *t, sunshine_h: t.map(|x| x.abs()), ..Default::default() });
            }
            let present: Vec<f64> = temps.iter().flatten().copied().collect();
            prop_assume!(!present.is_empty());
            let mean = present.iter().sum::<f64>() / present.len() as f64;
            prop_assert!((mwt(&s, season).unwrap() - mean).abs() < 1e-9);
            let mut fdd = 0.0;
            for &x in &present {
                if x < 0.0 { fdd -= x; }
            }
            let got = afdd(&s, season).unwrap();
            prop_assert!((got - fdd).abs() < 1e-9);
            prop_assert!(got >= 0.0);
            prop_assert_eq!(got == 0.0, present.iter().all(|&x| x >= 0.0));
            // Sep-Dec is the first 122 days of the season.
            let s2d: f64 = temps[..122].iter().flatten().map(|x| x.abs()).sum();
            let j2m: f64 = temps[122..].iter().flatten().map(|x| x.abs()).sum();
            let ind = compute_indicators(&s, season);
            if let Some(v) = ind.get(Indicator::Sunshine, Window::S2D) { prop_assert!((v - s2d).abs() < 1e-9); }
            if let Some(v) = ind.get(Indicator::Sunshine, Window::J2M) { prop_assert!((v - j2m).abs() < 1e-9); }
        }
    }
}
