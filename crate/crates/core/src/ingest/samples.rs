//! Per-pixel samples CSV: `lake_id,date,pixel_id,cloudy,label,b1,...,bK`.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{parse_f64, IngestError};

const FIXED_COLUMNS: [&str; 5] = ["lake_id", "date", "pixel_id", "cloudy", "label"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Frozen,
    NonFrozen,
    Unlabeled,
}

impl Label {
    pub fn as_str(&self) -> &'static str {
        match self {
            Label::Frozen => "frozen",
            Label::NonFrozen => "non_frozen",
            Label::Unlabeled => "unlabeled",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "frozen" => Ok(Label::Frozen),
            "non_frozen" => Ok(Label::NonFrozen),
            "unlabeled" => Ok(Label::Unlabeled),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

/// One clean pixel on one acquisition date.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelSample {
    pub lake_id: String,
    pub date: NaiveDate,
    pub pixel_id: u32,
    pub cloudy: bool,
    pub label: Label,
    pub bands: Vec<f64>,
}

impl PixelSample {
    pub fn band_count(&self) -> usize {
        self.bands.len()
    }
}

fn check_header(header: &csv::StringRecord) -> Result<usize, IngestError> {
    if header.len() < FIXED_COLUMNS.len() + 1 {
        return Err(IngestError::Header(format!(
            "expected {} followed by at least one band column",
            FIXED_COLUMNS.join(",")
        )));
    }
    for (i, want) in FIXED_COLUMNS.iter().enumerate() {
        if &header[i] != *want {
            return Err(IngestError::Header(format!(
                "column {} should be {want:?}, found {:?}",
                i + 1,
                &header[i]
            )));
        }
    }
    let bands = header.len() - FIXED_COLUMNS.len();
    for k in 0..bands {
        let want = format!("b{}", k + 1);
        let got = &header[FIXED_COLUMNS.len() + k];
        if got != want {
            return Err(IngestError::Header(format!(
                "band column {} should be {want:?}, found {got:?}",
                k + 1
            )));
        }
    }
    Ok(bands)
}

fn parse_row(rec: &csv::StringRecord, line: usize, bands: usize) -> Result<PixelSample, IngestError> {
    let row_err = |message: String| IngestError::Row { line, message };
    if rec.len() != FIXED_COLUMNS.len() + bands {
        return Err(row_err(format!(
            "expected {} fields, found {}",
            FIXED_COLUMNS.len() + bands,
            rec.len()
        )));
    }
    let lake_id = rec[0].to_string();
    if lake_id.is_empty() {
        return Err(row_err("empty lake_id".into()));
    }
    let date = NaiveDate::parse_from_str(&rec[1], "%Y-%m-%d")
        .map_err(|_| row_err(format!("bad date {:?}", &rec[1])))?;
    let pixel_id = rec[2]
        .parse::<u32>()
        .map_err(|_| row_err(format!("bad pixel_id {:?}", &rec[2])))?;
    let cloudy = match &rec[3] {
        "0" => false,
        "1" => true,
        other => return Err(row_err(format!("cloudy must be 0 or 1, got {other:?}"))),
    };
    let label = rec[4].parse::<Label>().map_err(row_err)?;
    let values = (0..bands)
        .map(|k| parse_f64(&rec[FIXED_COLUMNS.len() + k], line, &format!("b{}", k + 1)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PixelSample {
        lake_id,
        date,
        pixel_id,
        cloudy,
        label,
        bands: values,
    })
}

/// Parse samples from any reader. Line numbers in errors are 1-based and
/// count the header.
pub fn read_samples<R: Read>(reader: R) -> Result<Vec<PixelSample>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.records();
    let header = records.next().ok_or(IngestError::MissingHeader)??;
    let bands = check_header(&header)?;
    let mut out = Vec::new();
    for rec in records {
        let rec = rec?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        out.push(parse_row(&rec, line, bands)?);
    }
    Ok(out)
}

pub fn parse_samples_csv(path: &Path) -> Result<Vec<PixelSample>, IngestError> {
    let file = std::fs::File::open(path).map_err(|e| IngestError::io(path, e))?;
    read_samples(std::io::BufReader::new(file))
}

/// Write samples with `band_count` band columns. Floats use the shortest
/// representation that parses back to the same value.
pub fn write_samples<W: Write>(
    mut w: W,
    samples: &[PixelSample],
    band_count: usize,
) -> Result<(), IngestError> {
    let mut line = String::with_capacity(128);
    line.push_str(&FIXED_COLUMNS.join(","));
    for k in 1..=band_count {
        line.push_str(&format!(",b{k}"));
    }
    line.push('\n');
    let io = |e| IngestError::Csv(csv::Error::from(e));
    w.write_all(line.as_bytes()).map_err(io)?;
    for s in samples {
        if s.bands.len() != band_count {
            return Err(IngestError::Header(format!(
                "sample for pixel {} has {} bands, file has {band_count}",
                s.pixel_id,
                s.bands.len()
            )));
        }
        line.clear();
        use std::fmt::Write as _;
        let _ = write!(
            line,
            "{},{},{},{},{}",
            s.lake_id,
            s.date.format("%Y-%m-%d"),
            s.pixel_id,
            u8::from(s.cloudy),
            s.label
        );
        for b in &s.bands {
            let _ = write!(line, ",{b}");
        }
        line.push('\n');
        w.write_all(line.as_bytes()).map_err(io)?;
    }
    Ok(())
}

pub fn write_samples_csv(path: &Path, samples: &[PixelSample]) -> Result<(), IngestError> {
    let band_count = samples.first().map_or(1, |s| s.bands.len());
    let file = std::fs::File::create(path).map_err(|e| IngestError::io(path, e))?;
    let mut buf = std::io::BufWriter::new(file);
    write_samples(&mut buf, samples, band_count)?;
    buf.flush().map_err(|e| IngestError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const ONE_ROW: &str = "lake_id,date,pixel_id,cloudy,label,b1,b2\nsils,2016-12-31,4,0,frozen,0.31,0.125\n";

    #[test]
    fn parses_single_row() {
        let s = read_samples(ONE_ROW.as_bytes()).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].lake_id, "sils");
        assert_eq!(s[0].date, NaiveDate::from_ymd_opt(2016, 12, 31).unwrap());
        assert_eq!(s[0].pixel_id, 4);
        assert!(!s[0].cloudy);
        assert_eq!(s[0].label, Label::Frozen);
        assert_eq!(s[0].bands, vec![0.31, 0.125]);
    }

    #[test]
    fn unknown_label_names_line() {
        let text = "lake_id,date,pixel_id,cloudy,label,b1\nsils,2016-12-31,4,0,frozen,1\nsils,2017-01-01,4,0,ice,1\n";
        match read_samples(text.as_bytes()) {
            Err(IngestError::Row { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("ice"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(read_samples("".as_bytes()), Err(IngestError::MissingHeader)));
        assert!(matches!(
            read_samples("lake,date,pixel_id,cloudy,label,b1\n".as_bytes()),
            Err(IngestError::Header(_))
        ));
        let arity = "lake_id,date,pixel_id,cloudy,label,b1\nsils,2016-12-31,4,0,frozen\n";
        assert!(matches!(read_samples(arity.as_bytes()), Err(IngestError::Row { line: 2, .. })));
        let nonnum = "lake_id,date,pixel_id,cloudy,label,b1\nsils,2016-12-31,4,0,frozen,x\n";
        assert!(matches!(read_samples(nonnum.as_bytes()), Err(IngestError::Row { line: 2, .. })));
        let cloudy = "lake_id,date,pixel_id,cloudy,label,b1\nsils,2016-12-31,4,2,frozen,1\n";
        assert!(read_samples(cloudy.as_bytes()).is_err());
    }

    #[test]
    fn canonical_file_round_trips_bytes() {
        let parsed = read_samples(ONE_ROW.as_bytes()).unwrap();
        let mut out = Vec::new();
        write_samples(&mut out, &parsed, 2).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), ONE_ROW);
    }

    #[test]
    fn ten_thousand_rows_round_trip() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let base = NaiveDate::from_ymd_opt(2010, 9, 1).unwrap();
        let samples: Vec<_> = (0..10_000)
            .map(|i| PixelSample {
                lake_id: format!("lake{}", i % 3),
                date: base + chrono::Duration::days(i % 273),
                pixel_id: (i % 33) as u32,
                cloudy: rng.random_bool(0.3),
                label: [Label::Frozen, Label::NonFrozen, Label::Unlabeled][i as usize % 3],
                bands: (0..5).map(|_| rng.random_range(-1.0..1.0) * 10f64.powi(rng.random_range(-6..4))).collect(),
            })
            .collect();
        let mut out = Vec::new();
        write_samples(&mut out, &samples, 5).unwrap();
        let back = read_samples(out.as_slice()).unwrap();
        assert_eq!(back, samples);
    }

    proptest! {
        #[test]
        fn write_parse_write_is_stable(
            bands in proptest::collection::vec(proptest::num::f64::NORMAL | proptest::num::f64::ZERO, 3),
            pixel in 0u32..10_000,
            cloudy: bool,
        ) {
            let s = vec![PixelSample {
                lake_id: "silvaplana".into(),
                date: NaiveDate::from_ymd_opt(2004, 1, 14).unwrap(),
                pixel_id: pixel,
                cloudy,
                label: Label::NonFrozen,
                bands,
            }];
            let mut a = Vec::new();
            write_samples(&mut a, &s, 3).unwrap();
            let parsed = read_samples(a.as_slice()).unwrap();
            prop_assert_eq!(&parsed, &s);
            let mut b = Vec::new();
            write_samples(&mut b, &parsed, 3).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
