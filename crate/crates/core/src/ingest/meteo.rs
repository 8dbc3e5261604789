//! Daily station CSV: `station_id,date,tmean_c,precip_mm,sunshine_h,wind_kmh`.
//! Empty fields are missing measurements.

use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;

use super::{parse_f64, IngestError};
use crate::climate::{ClimateSeries, DailyRecord};

pub const METEO_HEADER: [&str; 6] = [
    "station_id",
    "date",
    "tmean_c",
    "precip_mm",
    "sunshine_h",
    "wind_kmh",
];

fn optional(field: &str, line: usize, column: &str) -> Result<Option<f64>, IngestError> {
    if field.is_empty() {
        Ok(None)
    } else {
        parse_f64(field, line, column).map(Some)
    }
}

pub fn read_meteo<R: Read>(reader: R) -> Result<ClimateSeries, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.records();
    let header = records.next().ok_or(IngestError::MissingHeader)??;
    if header.iter().ne(METEO_HEADER.iter().copied()) {
        return Err(IngestError::Header(format!(
            "expected {}",
            METEO_HEADER.join(",")
        )));
    }
    let mut series: Option<ClimateSeries> = None;
    for rec in records {
        let rec = rec?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let row_err = |message: String| IngestError::Row { line, message };
        if rec.len() != METEO_HEADER.len() {
            return Err(row_err(format!(
                "expected {} fields, found {}",
                METEO_HEADER.len(),
                rec.len()
            )));
        }
        let station = &rec[0];
        if station.is_empty() {
            return Err(row_err("empty station_id".into()));
        }
        let date = NaiveDate::parse_from_str(&rec[1], "%Y-%m-%d")
            .map_err(|_| row_err(format!("bad date {:?}", &rec[1])))?;
        let record = DailyRecord {
            tmean_c: optional(&rec[2], line, "tmean_c")?,
            precip_mm: optional(&rec[3], line, "precip_mm")?,
            sunshine_h: optional(&rec[4], line, "sunshine_h")?,
            wind_kmh: optional(&rec[5], line, "wind_kmh")?,
        };
        let s = series.get_or_insert_with(|| ClimateSeries::new(station));
        if s.station_id() != station {
            return Err(row_err(format!(
                "file mixes stations {:?} and {station:?}",
                s.station_id()
            )));
        }
        if !s.insert(date, record) {
            return Err(row_err(format!("duplicate date {date}")));
        }
    }
    series.ok_or_else(|| IngestError::Header("meteo file has no records".into()))
}

pub fn parse_meteo_csv(path: &Path) -> Result<ClimateSeries, IngestError> {
    let file = std::fs::File::open(path).map_err(|e| IngestError::io(path, e))?;
    read_meteo(std::io::BufReader::new(file))
}

pub fn write_meteo<W: Write>(mut w: W, series: &ClimateSeries) -> Result<(), IngestError> {
    let io = |e| IngestError::Csv(csv::Error::from(e));
    writeln!(w, "{}", METEO_HEADER.join(",")).map_err(io)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for (date, r) in series.records() {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            series.station_id(),
            date.format("%Y-%m-%d"),
            opt(r.tmean_c),
            opt(r.precip_mm),
            opt(r.sunshine_h),
            opt(r.wind_kmh)
        )
        .map_err(io)?;
    }
    Ok(())
}

pub fn write_meteo_csv(path: &Path, series: &ClimateSeries) -> Result<(), IngestError> {
    let file = std::fs::File::create(path).map_err(|e| IngestError::io(path, e))?;
    let mut buf = std::io::BufWriter::new(file);
    write_meteo(&mut buf, series)?;
    buf.flush().map_err(|e| IngestError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_complete_row() {
        let text = "station_id,date,tmean_c,precip_mm,sunshine_h,wind_kmh\nSIA,2010-01-05,-7.5,0,6.2,11\n";
        let s = read_meteo(text.as_bytes()).unwrap();
        assert_eq!(s.station_id(), "SIA");
        assert_eq!(s.len(), 1);
        let r = s.get(NaiveDate::from_ymd_opt(2010, 1, 5).unwrap()).unwrap();
        assert_eq!(r.tmean_c, Some(-7.5));
        assert_eq!(r.wind_kmh, Some(11.0));
    }

    #[test]
    fn empty_field_is_missing() {
        let text = "station_id,date,tmean_c,precip_mm,sunshine_h,wind_kmh\nSIA,2010-01-05,-7.5,0,,11\n";
        let s = read_meteo(text.as_bytes()).unwrap();
        let r = s.get(NaiveDate::from_ymd_opt(2010, 1, 5).unwrap()).unwrap();
        assert_eq!(r.sunshine_h, None);
        assert_eq!(r.precip_mm, Some(0.0));
    }

    #[test]
    fn rejects_duplicates_and_mixed_stations() {
        let dup = "station_id,date,tmean_c,precip_mm,sunshine_h,wind_kmh\nA,2010-01-05,1,,,\nA,2010-01-05,2,,,\n";
        assert!(matches!(read_meteo(dup.as_bytes()), Err(IngestError::Row { line: 3, .. })));
        let mixed = "station_id,date,tmean_c,precip_mm,sunshine_h,wind_kmh\nA,2010-01-05,1,,,\nB,2010-01-06,2,,,\n";
        assert!(read_meteo(mixed.as_bytes()).is_err());
        let bad = "station_id,date,tmean_c,precip_mm,sunshine_h,wind_kmh\nA,2010-01-05,warm,,,\n";
        assert!(matches!(read_meteo(bad.as_bytes()), Err(IngestError::Row { line: 2, .. })));
    }

    #[test]
    fn synthetic_year_round_trips() {
        let mut s = ClimateSeries::new("SIA");
        let start = NaiveDate::from_ymd_opt(2012, 9, 1).unwrap();
        for i in 0..273i64 {
            let t = (i as f64 * 0.37).sin() * 9.0 - 2.0;
            s.insert(
                start + chrono::Duration::days(i),
                DailyRecord {
                    tmean_c: Some(t),
                    precip_mm: if i % 5 == 0 { None } else { Some((i % 7) as f64 * 1.3) },
                    sunshine_h: Some((i % 11) as f64 * 0.7),
                    wind_kmh: if i % 13 == 0 { None } else { Some(8.0 + t.abs()) },
                },
            );
        }
        let mut buf = Vec::new();
        write_meteo(&mut buf, &s).unwrap();
        let back = read_meteo(buf.as_slice()).unwrap();
        assert_eq!(back, s);
        let mut again = Vec::new();
        write_meteo(&mut again, &back).unwrap();
        assert_eq!(buf, again);
    }
}
