//! Winter-season calendar conventions.
//!
//! A winter season runs from 1 September of its start year through 31 May of
//! the following year. Dates inside a season are addressed by a zero-based
//! [`DayIndex`] counted from 1 September, so that leap days never shift the
//! encoding of earlier dates.

use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeasonError {
    #[error("date {date} is outside winter {season}")]
    OutOfSeason { date: NaiveDate, season: String },
    #[error("day index {index} is outside winter {season} ({len} days)")]
    IndexOutOfRange {
        index: u32,
        season: String,
        len: u32,
    },
    #[error("invalid winter id {0:?}; expected \"YYYY-YY\" or \"YYYY-YYYY\"")]
    InvalidId(String),
    #[error("start year {0} is outside the supported calendar range")]
    InvalidYear(i32),
}

/// Zero-based offset of a date from 1 September of its season.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct DayIndex(pub u32);

impl DayIndex {
    pub fn value(self) -> u32 {
        self.0
    }

    /// Signed distance `self - other` in days.
    pub fn days_since(self, other: DayIndex) -> i64 {
        i64::from(self.0) - i64::from(other.0)
    }
}

impl fmt::Display for DayIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A Sep 1 .. May 31 observing season, identified by the September year.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WinterSeason {
    start_year: i32,
}

impl WinterSeason {
    pub fn new(start_year: i32) -> Result<Self, SeasonError> {
        // Both endpoints must be representable.
        if NaiveDate::from_ymd_opt(start_year, 9, 1).is_none()
            || NaiveDate::from_ymd_opt(start_year + 1, 5, 31).is_none()
        {
            return Err(SeasonError::InvalidYear(start_year));
        }
        Ok(Self { start_year })
    }

    /// The season a calendar date belongs to, if any (June through August
    /// belong to no season).
    pub fn containing(date: NaiveDate) -> Option<Self> {
        let start_year = match date.month() {
            9..=12 => date.year(),
            1..=5 => date.year() - 1,
            _ => return None,
        };
        Self::new(start_year).ok()
    }

    pub fn start_year(&self) -> i32 {
        self.start_year
    }

    /// Winter id such as `2016-17`.
    pub fn id(&self) -> String {
        format!(
            "{}-{:02}",
            self.start_year,
            (self.start_year + 1).rem_euclid(100)
        )
    }

    pub fn first_day(&self) -> NaiveDate {
        NaiveDate::from_ymd_opt(self.start_year, 9, 1).expect("validated in new")
    }

    pub fn last_day(&self) -> NaiveDate {
        NaiveDate::from_ymd_opt(self.start_year + 1, 5, 31).expect("validated in new")
    }

    /// Number of days in the season: 273, or 274 when it contains 29 February.
    pub fn len(&self) -> u32 {
        (self.last_day() - self.first_day()).num_days() as u32 + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        date >= self.first_day() && date <= self.last_day()
    }

    pub fn day_of_winter(&self, date: NaiveDate) -> Result<DayIndex, SeasonError> {
        if !self.contains(date) {
            return Err(SeasonError::OutOfSeason {
                date,
                season: self.id(),
            });
        }
        Ok(DayIndex((date - self.first_day()).num_days() as u32))
    }

    pub fn date_of(&self, index: DayIndex) -> Result<NaiveDate, SeasonError> {
        if index.0 >= self.len() {
            return Err(SeasonError::IndexOutOfRange {
                index: index.0,
                season: self.id(),
                len: self.len(),
            });
        }
        Ok(self.first_day() + chrono::Duration::days(i64::from(index.0)))
    }

    /// Day index of a month/day inside this season. September .. December
    /// map to the start year, January .. May to the following year.
    pub fn index_of_month_day(&self, month: u32, day: u32) -> Result<DayIndex, SeasonError> {
        let year = if month >= 9 {
            self.start_year
        } else {
            self.start_year + 1
        };
        let date = NaiveDate::from_ymd_opt(year, month, day)
            .ok_or_else(|| SeasonError::InvalidId(format!("{month:02}-{day:02}")))?;
        self.day_of_winter(date)
    }

    /// Iterate over every date of the season in order.
    pub fn days(&self) -> impl Iterator<Item = NaiveDate> {
        let first = self.first_day();
        (0..self.len()).map(move |i| first + chrono::Duration::days(i64::from(i)))
    }
}

impl fmt::Display for WinterSeason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl FromStr for WinterSeason {
    type Err = SeasonError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SeasonError::InvalidId(s.to_string());
        let (start, end) = s.trim().split_once('-').ok_or_else(bad)?;
        if start.len() != 4 || !start.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        if !end.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let start_year: i32 = start.parse().map_err(|_| bad())?;
        let next = start_year + 1;
        let matches = match end.len() {
            2 => end.parse::<i32>().map_err(|_| bad())? == next.rem_euclid(100),
            4 => end.parse::<i32>().map_err(|_| bad())? == next,
            _ => false,
        };
        if !matches {
            return Err(bad());
        }
        WinterSeason::new(start_year)
    }
}

impl Serialize for WinterSeason {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.id())
    }
}

impl<'de> Deserialize<'de> for WinterSeason {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    #[test]
    fn first_day_is_index_zero() {
        let w: WinterSeason = "2016-17".parse().unwrap();
        assert_eq!(w.day_of_winter(d(2016, 9, 1)).unwrap(), DayIndex(0));
    }

    #[test]
    fn new_years_eve_index() {
        // Sep 30 + Oct 31 + Nov 30 + Dec 31 days, minus one for zero-based.
        let w = WinterSeason::new(2016).unwrap();
        assert_eq!(w.day_of_winter(d(2016, 12, 31)).unwrap(), DayIndex(121));
    }

    #[test]
    fn june_is_out_of_season() {
        let w = WinterSeason::new(2016).unwrap();
        assert!(matches!(
            w.day_of_winter(d(2017, 6, 1)),
            Err(SeasonError::OutOfSeason { .. })
        ));
        assert!(w.day_of_winter(d(2016, 8, 31)).is_err());
    }

    #[test]
    fn season_length_tracks_leap_years() {
        assert_eq!(WinterSeason::new(2016).unwrap().len(), 273);
        assert_eq!(WinterSeason::new(2015).unwrap().len(), 274);
        assert_eq!(WinterSeason::new(1999).unwrap().len(), 274);
        assert_eq!(WinterSeason::new(2099).unwrap().len(), 273);
    }

    #[test]
    fn id_formats() {
        assert_eq!(WinterSeason::new(2016).unwrap().id(), "2016-17");
        assert_eq!(WinterSeason::new(1999).unwrap().id(), "1999-00");
        let long: WinterSeason = "2016-2017".parse().unwrap();
        assert_eq!(long.start_year(), 2016);
        let short: WinterSeason = "1999-00".parse().unwrap();
        assert_eq!(short.start_year(), 1999);
        assert!("2016-18".parse::<WinterSeason>().is_err());
        assert!("2016".parse::<WinterSeason>().is_err());
        assert!("16-17".parse::<WinterSeason>().is_err());
    }

    #[test]
    fn containing_season() {
        assert_eq!(
            WinterSeason::containing(d(2004, 1, 14)).unwrap().id(),
            "2003-04"
        );
        assert_eq!(
            WinterSeason::containing(d(2003, 9, 1)).unwrap().id(),
            "2003-04"
        );
        assert!(WinterSeason::containing(d(2003, 7, 1)).is_none());
    }

    #[test]
    fn date_of_rejects_past_end() {
        let w = WinterSeason::new(2016).unwrap();
        assert_eq!(w.date_of(DayIndex(272)).unwrap(), d(2017, 5, 31));
        assert!(w.date_of(DayIndex(273)).is_err());
    }

    proptest! {
        #[test]
        fn day_index_round_trips(year in 1950i32..2100, frac in 0.0f64..1.0) {
            let w = WinterSeason::new(year).unwrap();
            let i = DayIndex((frac * f64::from(w.len())) as u32);
            let date = w.date_of(i).unwrap();
            prop_assert_eq!(w.day_of_winter(date).unwrap(), i);
        }

        #[test]
        fn indices_increase_with_date(year in 1950i32..2100) {
            let w = WinterSeason::new(year).unwrap();
            let idx: Vec<u32> = w.days().map(|dt| w.day_of_winter(dt).unwrap().0).collect();
            prop_assert_eq!(idx.len() as u32, w.len());
            prop_assert!(idx.windows(2).all(|p| p[1] == p[0] + 1));
        }
    }
}
