use std::collections::BTreeMap;
use std::io::{Read, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{EventDates, LipEvent, PhenologyError, MAX_TRANSITION_DAYS};
use crate::season::{DayIndex, WinterSeason};

/// Fitted (or corrected) events for one lake-winter.
#[derive(Debug, Clone, PartialEq)]
pub struct PhenologyRecord {
    pub lake_id: String,
    pub season: WinterSeason,
    pub fus: Option<DayIndex>,
    pub fue: Option<DayIndex>,
    pub bus: Option<DayIndex>,
    pub bue: Option<DayIndex>,
    pub icd_days: Option<i64>,
    pub cfd_days: Option<i64>,
    pub fit_loss: Option<f64>,
    /// Some candidate list was empty or no tuple met the constraints.
    pub incomplete: bool,
    pub corrected: bool,
    pub override_note: String,
    /// Fitted values before the first override.
    pub original: Option<[Option<DayIndex>; 4]>,
    pub candidates_counts: [usize; 4],
}

impl PhenologyRecord {
    pub fn empty(lake_id: &str, season: WinterSeason) -> Self {
        Self {
            lake_id: lake_id.to_string(),
            season,
            fus: None,
            fue: None,
            bus: None,
            bue: None,
            icd_days: None,
            cfd_days: None,
            fit_loss: None,
            incomplete: false,
            corrected: false,
            override_note: String::new(),
            original: None,
            candidates_counts: [0; 4],
        }
    }

    pub fn events(&self) -> [Option<DayIndex>; 4] {
        [self.fus, self.fue, self.bus, self.bue]
    }

    pub fn get(&self, e: LipEvent) -> Option<DayIndex> {
        self.events()[e.index()]
    }

    fn set(&mut self, e: LipEvent, d: Option<DayIndex>) {
        match e {
            LipEvent::Fus => self.fus = d,
            LipEvent::Fue => self.fue = d,
            LipEvent::Bus => self.bus = d,
            LipEvent::Bue => self.bue = d,
        }
    }

    /// All four events, if present.
    pub fn dates(&self) -> Option<EventDates> {
        match self.events() {
            [Some(a), Some(b), Some(c), Some(d)] => Some(EventDates { fus: a, fue: b, bus: c, bue: d }),
            _ => None,
        }
    }

    pub fn date_of(&self, e: LipEvent) -> Option<NaiveDate> {
        self.get(e).and_then(|d| self.season.date_of(d).ok())
    }

    /// Ordering among the present events and the two transition caps.
    pub fn check(&self) -> Result<(), PhenologyError> {
        let present: Vec<(LipEvent, DayIndex)> =
            LipEvent::ALL.iter().filter_map(|&e| self.get(e).map(|d| (e, d))).collect();
        for w in present.windows(2) {
            if w[1].1 < w[0].1 {
                return Err(PhenologyError::Unordered(format!(
                    "{} {} after {} {}",
                    w[0].0, w[0].1, w[1].0, w[1].1
                )));
            }
        }
        for (a, b, name) in [(self.fus, self.fue, "freeze-up"), (self.bus, self.bue, "break-up")] {
            if let (Some(a), Some(b)) = (a, b) {
                if b.0 - a.0 > MAX_TRANSITION_DAYS {
                    return Err(PhenologyError::TooLong {
                        event: name,
                        days: b.0 - a.0,
                    });
                }
            }
        }
        Ok(())
    }
}

/// ICD = BUE − FUS and CFD = BUS − FUE, each absent when a constituent is.
pub fn derive_durations(mut rec: PhenologyRecord) -> PhenologyRecord {
    let span = |a: Option<DayIndex>, b: Option<DayIndex>| a.zip(b).map(|(a, b)| b.days_since(a));
    rec.icd_days = span(rec.fus, rec.bue);
    rec.cfd_days = span(rec.fue, rec.bus);
    rec
}

/// Replace the listed events with manual dates. The result must still
/// satisfy the ordering and duration constraints.
pub fn apply_overrides(
    rec: &PhenologyRecord,
    overrides: &BTreeMap<LipEvent, NaiveDate>,
    note: &str,
) -> Result<PhenologyRecord, PhenologyError> {
    if overrides.is_empty() {
        return Ok(rec.clone());
    }
    let mut out = rec.clone();
    for (&e, &date) in overrides {
        out.set(e, Some(rec.season.day_of_winter(date)?));
    }
    out.check()?;
    if out.original.is_none() {
        out.original = Some(rec.events());
    }
    out.corrected = true;
    out.override_note = note.to_string();
    Ok(derive_durations(out))
}

/// Manual corrections keyed by (lake, winter): event dates plus a note.
pub type Overrides = BTreeMap<(String, WinterSeason), (BTreeMap<LipEvent, NaiveDate>, String)>;

/// Corrections CSV `lake_id,winter,event,date,note`, grouped per
/// lake-winter. Notes of one group are joined with "; ".
pub fn parse_overrides<R: Read>(reader: R) -> Result<Overrides, PhenologyError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    let want = ["lake_id", "winter", "event", "date", "note"];
    if header.iter().collect::<Vec<_>>() != want {
        return Err(PhenologyError::Row {
            line: 1,
            message: format!("expected header {}", want.join(",")),
        });
    }
    let mut out = Overrides::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let line = i + 2;
        let bad = |message: String| PhenologyError::Row { line, message };
        let season: WinterSeason = row[1].parse().map_err(|e| bad(format!("{e}")))?;
        let event: LipEvent = row[2].parse().map_err(bad)?;
        let date = NaiveDate::parse_from_str(&row[3], "%Y-%m-%d").map_err(|e| bad(format!("date {:?}: {e}", &row[3])))?;
        if !season.contains(date) {
            return Err(bad(format!("{date} is outside winter {season}")));
        }
        let entry = out.entry((row[0].to_string(), season)).or_default();
        if entry.0.insert(event, date).is_some() {
            return Err(bad(format!("duplicate {event} override")));
        }
        let note = &row[4];
        if !note.is_empty() && !entry.1.split("; ").any(|n| n == note) {
            if !entry.1.is_empty() {
                entry.1.push_str("; ");
            }
            entry.1.push_str(note);
        }
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EventsJson {
    fus: Option<NaiveDate>,
    fue: Option<NaiveDate>,
    bus: Option<NaiveDate>,
    bue: Option<NaiveDate>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordJson {
    lake_id: String,
    winter: WinterSeason,
    fus: Option<NaiveDate>,
    fue: Option<NaiveDate>,
    bus: Option<NaiveDate>,
    bue: Option<NaiveDate>,
    icd_days: Option<i64>,
    cfd_days: Option<i64>,
    fit_loss: Option<f64>,
    incomplete: bool,
    corrected: bool,
    override_note: String,
    original: Option<EventsJson>,
    candidates_counts: [usize; 4],
}

fn to_dates(season: WinterSeason, ev: [Option<DayIndex>; 4]) -> Result<[Option<NaiveDate>; 4], PhenologyError> {
    let mut out = [None; 4];
    for (o, d) in out.iter_mut().zip(ev) {
        *o = d.map(|d| season.date_of(d)).transpose()?;
    }
    Ok(out)
}

fn to_days(season: WinterSeason, ev: [Option<NaiveDate>; 4]) -> Result<[Option<DayIndex>; 4], PhenologyError> {
    let mut out = [None; 4];
    for (o, d) in out.iter_mut().zip(ev) {
        *o = d.map(|d| season.day_of_winter(d)).transpose()?;
    }
    Ok(out)
}

impl PhenologyRecord {
    fn to_json(&self) -> Result<RecordJson, PhenologyError> {
        let [fus, fue, bus, bue] = to_dates(self.season, self.events())?;
        let original = self
            .original
            .map(|o| to_dates(self.season, o))
            .transpose()?
            .map(|[fus, fue, bus, bue]| EventsJson { fus, fue, bus, bue });
        Ok(RecordJson {
            lake_id: self.lake_id.clone(),
            winter: self.season,
            fus,
            fue,
            bus,
            bue,
            icd_days: self.icd_days,
            cfd_days: self.cfd_days,
            fit_loss: self.fit_loss,
            incomplete: self.incomplete,
            corrected: self.corrected,
            override_note: self.override_note.clone(),
            original,
            candidates_counts: self.candidates_counts,
        })
    }

    fn from_json(j: RecordJson) -> Result<Self, PhenologyError> {
        let [fus, fue, bus, bue] = to_days(j.winter, [j.fus, j.fue, j.bus, j.bue])?;
        let original = j
            .original
            .map(|o| to_days(j.winter, [o.fus, o.fue, o.bus, o.bue]))
            .transpose()?;
        let rec = Self {
            lake_id: j.lake_id,
            season: j.winter,
            fus,
            fue,
            bus,
            bue,
            icd_days: j.icd_days,
            cfd_days: j.cfd_days,
            fit_loss: j.fit_loss,
            incomplete: j.incomplete,
            corrected: j.corrected,
            override_note: j.override_note,
            original,
            candidates_counts: j.candidates_counts,
        };
        rec.check()?;
        let derived = derive_durations(rec.clone());
        if (derived.icd_days, derived.cfd_days) != (rec.icd_days, rec.cfd_days) {
            return Err(PhenologyError::Unordered(format!(
                "{} {}: durations disagree with dates",
                rec.lake_id, rec.season
            )));
        }
        Ok(rec)
    }
}

/// Pretty-printed JSON array, one object per lake-winter.
pub fn write_records_json<W: Write>(mut w: W, records: &[PhenologyRecord]) -> Result<(), PhenologyError> {
    let js = records.iter().map(|r| r.to_json()).collect::<Result<Vec<_>, _>>()?;
    serde_json::to_writer_pretty(&mut w, &js)?;
    w.write_all(b"\n").map_err(serde_json::Error::io)?;
    Ok(())
}

pub fn read_records_json<R: Read>(r: R) -> Result<Vec<PhenologyRecord>, PhenologyError> {
    let js: Vec<RecordJson> = serde_json::from_reader(r)?;
    js.into_iter().map(PhenologyRecord::from_json).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(ev: [u32; 4]) -> PhenologyRecord {
        let mut r = PhenologyRecord::empty("sils", WinterSeason::new(2009).unwrap());
        r.fus = Some(DayIndex(ev[0]));
        r.fue = Some(DayIndex(ev[1]));
        r.bus = Some(DayIndex(ev[2]));
        r.bue = Some(DayIndex(ev[3]));
        r.fit_loss = Some(12.5);
        derive_durations(r)
    }

    fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    #[test]
    fn durations() {
        let r = rec([124, 127, 240, 241]);
        assert_eq!((r.icd_days, r.cfd_days), (Some(117), Some(113)));
        let r = rec([50, 50, 50, 50]);
        assert_eq!((r.icd_days, r.cfd_days), (Some(0), Some(0)));
        let mut r = rec([124, 127, 240, 241]);
        r.bue = None;
        let r = derive_durations(r);
        assert_eq!((r.icd_days, r.cfd_days), (None, Some(113)));
    }

    #[test]
    fn sils_late_break_up_corrected() {
        let season = WinterSeason::new(2009).unwrap();
        let fitted = rec([
            season.day_of_winter(ymd(2009, 12, 28)).unwrap().0,
            season.day_of_winter(ymd(2010, 1, 2)).unwrap().0,
            season.day_of_winter(ymd(2010, 5, 19)).unwrap().0,
            season.day_of_winter(ymd(2010, 5, 19)).unwrap().0,
        ]);
        let ov = BTreeMap::from([(LipEvent::Bus, ymd(2010, 4, 29)), (LipEvent::Bue, ymd(2010, 4, 30))]);
        let out = apply_overrides(&fitted, &ov, "cloud-hidden melt").unwrap();
        assert!(out.corrected);
        assert_eq!(out.date_of(LipEvent::Bus), Some(ymd(2010, 4, 29)));
        assert_eq!(out.date_of(LipEvent::Bue), Some(ymd(2010, 4, 30)));
        assert_eq!(out.original, Some(fitted.events()));
        assert_eq!(out.fus, fitted.fus);
        assert_eq!(out.icd_days, Some(out.bue.unwrap().days_since(out.fus.unwrap())));
    }

    #[test]
    fn empty_override_is_identity() {
        let r = rec([124, 127, 240, 241]);
        let out = apply_overrides(&r, &BTreeMap::new(), "nothing").unwrap();
        assert_eq!(out, r);
        assert!(!out.corrected);
    }

    #[test]
    fn invalid_override_rejected() {
        let r = rec([124, 127, 240, 241]);
        let ov = BTreeMap::from([(LipEvent::Bue, ymd(2010, 4, 1))]);
        assert!(apply_overrides(&r, &ov, "").is_err());
        let ov = BTreeMap::from([(LipEvent::Bue, ymd(2010, 7, 1))]);
        assert!(apply_overrides(&r, &ov, "").is_err());
    }

    #[test]
    fn json_round_trip() {
        let mut r = rec([124, 127, 240, 241]);
        r.candidates_counts = [1, 2, 3, 4];
        let ov = BTreeMap::from([(LipEvent::Fus, ymd(2010, 1, 2))]);
        let c = apply_overrides(&r, &ov, "manual").unwrap();
        let mut partial = PhenologyRecord::empty("silvaplana", WinterSeason::new(2011).unwrap());
        partial.incomplete = true;
        let mut buf = Vec::new();
        write_records_json(&mut buf, &[r.clone(), c.clone(), partial.clone()]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains("\"fus\": \"2010-01-03\""));
        assert!(text.contains("\"winter\": \"2009-10\""));
        assert!(text.contains("\"bue\": null"));
        assert_eq!(read_records_json(&buf[..]).unwrap(), vec![r, c, partial]);
    }

    #[test]
    fn overrides_csv() {
        let text = "lake_id,winter,event,date,note\n\
                    sils,2009-10,BUS,2010-04-29,webcam\n\
                    sils,2009-10,BUE,2010-04-30,webcam\n\
                    sils,2010-11,FUS,2010-12-20,\n";
        let m = parse_overrides(text.as_bytes()).unwrap();
        let (ev, note) = &m[&("sils".to_string(), WinterSeason::new(2009).unwrap())];
        assert_eq!(ev.len(), 2);
        assert_eq!(note, "webcam");
        assert_eq!(m.len(), 2);
        let dup = "lake_id,winter,event,date,note\nsils,2009-10,BUS,2010-04-29,a\nsils,2009-10,BUS,2010-04-28,b\n";
        assert!(matches!(parse_overrides(dup.as_bytes()), Err(PhenologyError::Row { line: 3, .. })));
        let outside = "lake_id,winter,event,date,note\nsils,2009-10,BUS,2010-07-29,a\n";
        assert!(parse_overrides(outside.as_bytes()).is_err());
    }
}
