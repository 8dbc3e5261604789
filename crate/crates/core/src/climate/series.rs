use std::collections::BTreeMap;

use chrono::NaiveDate;

/// One day of station data; any field may be missing.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DailyRecord {
    pub tmean_c: Option<f64>,
    pub precip_mm: Option<f64>,
    pub sunshine_h: Option<f64>,
    pub wind_kmh: Option<f64>,
}

/// Daily records of one station, at most one per date.
#[derive(Debug, Clone, PartialEq)]
pub struct ClimateSeries {
    station_id: String,
    days: BTreeMap<NaiveDate, DailyRecord>,
}

impl ClimateSeries {
    pub fn new(station_id: impl Into<String>) -> Self {
        Self {
            station_id: station_id.into(),
            days: BTreeMap::new(),
        }
    }

    pub fn station_id(&self) -> &str {
        &self.station_id
    }

    /// False (and no change) if the date already has a record.
    pub fn insert(&mut self, date: NaiveDate, rec: DailyRecord) -> bool {
        if self.days.contains_key(&date) {
            return false;
        }
        self.days.insert(date, rec);
        true
    }

    pub fn get(&self, date: NaiveDate) -> Option<&DailyRecord> {
        self.days.get(&date)
    }

    /// In date order.
    pub fn records(&self) -> impl Iterator<Item = (NaiveDate, &DailyRecord)> + '_ {
        self.days.iter().map(|(d, r)| (*d, r))
    }

    pub fn range(&self, first: NaiveDate, last: NaiveDate) -> impl Iterator<Item = (NaiveDate, &DailyRecord)> + '_ {
        self.days.range(first..=last).map(|(d, r)| (*d, r))
    }

    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }
}
