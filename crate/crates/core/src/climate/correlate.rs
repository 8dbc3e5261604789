use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::{pearson, Indicator, Metric, Window, WinterIndicators};
use crate::phenology::PhenologyRecord;
use crate::season::WinterSeason;

pub const CORRELATION_HEADER: &str = "lake_id,event,indicator,window,n,r";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationRow {
    pub lake_id: String,
    pub event: Metric,
    pub indicator: Indicator,
    pub window: Window,
    /// Winters with both values.
    pub n: usize,
    /// Absent when fewer than two winters overlap or either side is
    /// constant.
    pub r: Option<f64>,
}

/// Indicator windows each metric is compared against: freeze-up with the
/// autumn, break-up with the spring, durations with the whole winter.
/// Temperature indicators are always whole-winter.
pub fn pairing_plan() -> Vec<(Metric, Indicator, Window)> {
    let mut plan = Vec::new();
    for m in Metric::ALL {
        let window = match m {
            Metric::Fus | Metric::Fue => Window::S2D,
            Metric::Bus | Metric::Bue => Window::J2M,
            Metric::Icd | Metric::Cfd => Window::Full,
        };
        plan.push((m, Indicator::Mwt, Window::Full));
        plan.push((m, Indicator::Afdd, Window::Full));
        for ind in [Indicator::Sunshine, Indicator::Precip, Indicator::Wind] {
            plan.push((m, ind, window));
        }
    }
    plan
}

/// Pearson coefficients per lake and plan entry over the winters where
/// both the metric and the indicator exist. `indicators` is keyed by lake
/// id; lakes without an entry get empty rows.
pub fn correlate_events(
    records: &[PhenologyRecord],
    indicators: &BTreeMap<String, Vec<WinterIndicators>>,
    plan: &[(Metric, Indicator, Window)],
) -> Vec<CorrelationRow> {
    let climate: BTreeMap<(&str, WinterSeason), &WinterIndicators> = indicators
        .iter()
        .flat_map(|(lake, list)| list.iter().map(move |i| ((lake.as_str(), i.season), i)))
        .collect();
    let mut by_lake: BTreeMap<&str, Vec<&PhenologyRecord>> = BTreeMap::new();
    for r in records {
        by_lake.entry(&r.lake_id).or_default().push(r);
    }
    type Job<'a> = (&'a str, &'a [&'a PhenologyRecord], (Metric, Indicator, Window));
    let jobs: Vec<Job> = by_lake
        .iter()
        .flat_map(|(lake, recs)| plan.iter().map(move |&p| (*lake, recs.as_slice(), p)))
        .collect();
    jobs.par_iter()
        .map(|&(lake, recs, (m, ind, window))| {
            let mut by_season: BTreeMap<WinterSeason, (f64, f64)> = BTreeMap::new();
            for r in recs {
                let Some(v) = m.value(r) else { continue };
                let Some(c) = climate.get(&(lake, r.season)).and_then(|c| c.get(ind, window)) else {
                    continue;
                };
                by_season.insert(r.season, (v, c));
            }
            let (x, y): (Vec<f64>, Vec<f64>) = by_season.into_values().unzip();
            CorrelationRow {
                lake_id: lake.to_string(),
                event: m,
                indicator: ind,
                window,
                n: x.len(),
                r: pearson(&x, &y).ok(),
            }
        })
        .collect()
}

pub fn write_correlations<W: Write>(mut w: W, rows: &[CorrelationRow]) -> std::io::Result<()> {
    writeln!(w, "{CORRELATION_HEADER}")?;
    for row in rows {
        let r = row.r.map(|r| r.to_string()).unwrap_or_else(|| "NA".into());
        writeln!(
            w,
            "{},{},{},{},{},{}",
            row.lake_id, row.event, row.indicator, row.window, row.n, r
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::climate::Aggregate;
    use crate::phenology::derive_durations;
    use crate::season::DayIndex;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn record(lake: &str, year: i32, ev: [u32; 4]) -> PhenologyRecord {
        let mut r = PhenologyRecord::empty(lake, WinterSeason::new(year).unwrap());
        [r.fus, r.fue, r.bus, r.bue] = ev.map(|d| Some(DayIndex(d)));
        derive_durations(r)
    }

    fn indicators(year: i32, mwt: f64, sun: f64) -> WinterIndicators {
        let mut values = BTreeMap::new();
        let a = |value| Aggregate { value, days: 273 };
        values.insert((Indicator::Mwt, Window::Full), a(mwt));
        values.insert((Indicator::Afdd, Window::Full), a(-10.0 * mwt));
        for w in [Window::Full, Window::S2D, Window::J2M] {
            values.insert((Indicator::Sunshine, w), a(sun));
        }
        WinterIndicators {
            season: WinterSeason::new(year).unwrap(),
            values,
        }
    }

    #[test]
    fn exact_linear_link() {
        let mut recs = Vec::new();
        let mut inds = Vec::new();
        for (i, year) in (2000..2010).enumerate() {
            let t = (i as f64 * 1.7).sin();
            let cfd = 100 + (i * 3) as u32;
            recs.push(record("sils", year, [120, 122, 122 + cfd, 125 + cfd]));
            inds.push(indicators(year, 5.0 - 0.1 * cfd as f64, 300.0 + t));
        }
        let inds = BTreeMap::from([("sils".to_string(), inds)]);
        let rows = correlate_events(&recs, &inds, &pairing_plan());
        assert_eq!(rows.len(), pairing_plan().len());
        let get = |m, ind| rows.iter().find(|r| r.event == m && r.indicator == ind).unwrap();
        assert!((get(Metric::Cfd, Indicator::Mwt).r.unwrap() + 1.0).abs() < 1e-12);
        assert!((get(Metric::Cfd, Indicator::Afdd).r.unwrap() - 1.0).abs() < 1e-12);
        // Constant FUS: undefined.
        assert_eq!(get(Metric::Fus, Indicator::Mwt).r, None);
        // No wind data at all.
        assert_eq!(get(Metric::Icd, Indicator::Wind).n, 0);
    }

    #[test]
    fn single_overlap_unavailable() {
        let recs = vec![record("sils", 2000, [1, 2, 3, 4]), record("sils", 2001, [2, 3, 4, 5])];
        let inds = BTreeMap::from([("sils".to_string(), vec![indicators(2001, 1.0, 2.0)])]);
        let rows = correlate_events(&recs, &inds, &pairing_plan());
        assert!(rows.iter().all(|r| r.n <= 1 && r.r.is_none()));
    }

    #[test]
    fn random_series_well_formed() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut recs = Vec::new();
        let mut inds = Vec::new();
        for year in 2000..2020 {
            let fus = rng.random_range(90..130);
            let fue = fus + rng.random_range(0..10);
            let bus = fue + rng.random_range(80..120);
            let bue = bus + rng.random_range(0..10);
            recs.push(record("a", year, [fus, fue, bus, bue]));
            recs.push(record("b", year, [fus + 1, fue + 2, bus, bue]));
            inds.push(indicators(year, rng.random_range(-5.0..3.0), rng.random_range(200.0..600.0)));
        }
        let inds = BTreeMap::from([("a".to_string(), inds.clone()), ("b".to_string(), inds)]);
        let rows = correlate_events(&recs, &inds, &pairing_plan());
        assert_eq!(rows.len(), 2 * pairing_plan().len());
        for r in &rows {
            if matches!(r.indicator, Indicator::Wind | Indicator::Precip) {
                assert!(r.r.is_none());
            } else {
                assert_eq!(r.n, 20);
                assert!(r.r.unwrap().abs() < 1.0);
            }
        }
        let mut buf = Vec::new();
        write_correlations(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), rows.len() + 1);
        assert!(text.lines().all(|l| l.split(',').count() == 6));
    }
}
