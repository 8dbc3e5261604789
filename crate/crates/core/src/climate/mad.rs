use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::Serialize;

use super::ClimateError;
use crate::season::WinterSeason;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MadResult {
    pub season: WinterSeason,
    pub mad: f64,
    pub common_days: usize,
}

/// Mean absolute difference of two daily frozen-percentage series over the
/// season days present in both.
pub fn mad_compare(
    a: &BTreeMap<NaiveDate, f64>,
    b: &BTreeMap<NaiveDate, f64>,
    season: WinterSeason,
) -> Result<MadResult, ClimateError> {
    let (mut sum, mut n) = (0.0, 0usize);
    for (d, x) in a.range(season.first_day()..=season.last_day()) {
        if let Some(y) = b.get(d) {
            sum += (x - y).abs();
            n += 1;
        }
    }
    if n == 0 {
        return Err(ClimateError::NoCommonDays);
    }
    Ok(MadResult {
        season,
        mad: sum / n as f64,
        common_days: n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MadSummary {
    pub mean: f64,
    /// Population standard deviation across winters.
    pub std: f64,
    pub winters: usize,
}

pub fn mad_summary(results: &[MadResult]) -> Option<MadSummary> {
    if results.is_empty() {
        return None;
    }
    let n = results.len() as f64;
    let mean = results.iter().map(|r| r.mad).sum::<f64>() / n;
    let var = results.iter().map(|r| (r.mad - mean).powi(2)).sum::<f64>() / n;
    Some(MadSummary {
        mean,
        std: var.sqrt(),
        winters: results.len(),
    })
}
