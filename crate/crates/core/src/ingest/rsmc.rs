//! RSMC Tokyo best-track format.
//!
//! Each storm is a header line starting with `66666` followed by the number
//! of data lines it declares. Columns are fixed-width (1-indexed, inclusive):
//!
//! ```text
//! header: 1-5 "66666", 7-10 international id, 13-15 data line count,
//!         17-20 cyclone number, 31-50 name
//! data:   1-8 yymmddhh, 10-12 "002", 14 grade, 16-18 lat*10, 20-23 lon*10,
//!         25-28 pressure, 34-36 max wind, 42 dir, 43-46 long r50,
//!         48-51 short r50, 53 dir, 54-57 long r30, 59-62 short r30,
//!         72 landfall '#'
//! ```

use std::io::BufRead;
use std::str::FromStr;

use chrono::{NaiveDate, TimeZone, Utc};

use super::{StormRecord, StormRecordSet, WindRadii};
use crate::{Error, Result};

const HEADER_INDICATOR: &str = "66666";

fn field(line: &str, from: usize, to: usize) -> &str {
    let start = (from - 1).min(line.len());
    let end = to.min(line.len());
    line.get(start..end).unwrap_or("").trim()
}

fn optional<T: FromStr>(line: &str, from: usize, to: usize, what: &str, line_no: usize) -> Result<Option<T>> {
    let raw = field(line, from, to);
    if raw.is_empty() {
        return Ok(None);
    }
    raw.parse().map(Some).map_err(|_| Error::Parse {
        line: line_no,
        message: format!("{what} '{raw}' is not numeric"),
    })
}

fn required<T: FromStr>(line: &str, from: usize, to: usize, what: &str, line_no: usize) -> Result<T> {
    optional(line, from, to, what, line_no)?.ok_or_else(|| Error::Parse {
        line: line_no,
        message: format!("missing {what}"),
    })
}

struct Header {
    storm_id: String,
    name: String,
    declared: usize,
    line_no: usize,
}

fn parse_header(line: &str, line_no: usize) -> Result<Header> {
    let count = field(line, 13, 15);
    let declared = count.parse().map_err(|_| Error::Parse {
        line: line_no,
        message: format!("malformed header: record count '{count}' is not numeric"),
    })?;
    let mut storm_id = field(line, 7, 10).to_owned();
    if storm_id.is_empty() {
        storm_id = field(line, 17, 20).to_owned();
    }
    Ok(Header {
        storm_id,
        name: field(line, 31, 50).to_owned(),
        declared,
        line_no,
    })
}

fn parse_data(line: &str, line_no: usize) -> Result<StormRecord> {
    let stamp = field(line, 1, 8);
    let bad_time = || Error::Parse {
        line: line_no,
        message: format!("bad timestamp '{stamp}'"),
    };
    if stamp.len() != 8 || !stamp.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad_time());
    }
    let num = |r: std::ops::Range<usize>| stamp[r].parse::<u32>().unwrap();
    let yy = num(0..2) as i32;
    let year = if yy >= 51 { 1900 + yy } else { 2000 + yy };
    let date = NaiveDate::from_ymd_opt(year, num(2..4), num(4..6)).ok_or_else(bad_time)?;
    let naive = date.and_hms_opt(num(6..8), 0, 0).ok_or_else(bad_time)?;
    let time = Utc.from_utc_datetime(&naive);

    let lat: i32 = required(line, 16, 18, "latitude", line_no)?;
    let lon: i32 = required(line, 20, 23, "longitude", line_no)?;

    Ok(StormRecord {
        time,
        grade: optional(line, 14, 14, "grade", line_no)?,
        lat: lat as f64 / 10.0,
        lon: lon as f64 / 10.0,
        central_pressure: optional(line, 25, 28, "central pressure", line_no)?,
        max_wind: optional(line, 34, 36, "maximum wind", line_no)?,
        radii: WindRadii {
            dir_long_50kt: optional(line, 42, 42, "50kt direction", line_no)?,
            long_50kt: optional(line, 43, 46, "50kt long radius", line_no)?,
            short_50kt: optional(line, 48, 51, "50kt short radius", line_no)?,
            dir_long_30kt: optional(line, 53, 53, "30kt direction", line_no)?,
            long_30kt: optional(line, 54, 57, "30kt long radius", line_no)?,
            short_30kt: optional(line, 59, 62, "30kt short radius", line_no)?,
        },
        landfall: field(line, 72, 72) == "#",
    })
}

fn finish(header: Header, records: Vec<StormRecord>) -> Result<StormRecordSet> {
    if records.len() != header.declared {
        return Err(Error::Truncated {
            storm_id: header.storm_id,
            header_line: header.line_no,
            declared: header.declared,
            found: records.len(),
        });
    }
    let storm = StormRecordSet {
        storm_id: header.storm_id,
        name: header.name,
        records,
    };
    storm.validate()?;
    Ok(storm)
}

/// Parses a whole best-track stream, one [`StormRecordSet`] per header.
pub fn parse_rsmc<R: BufRead>(input: R) -> Result<Vec<StormRecordSet>> {
    let mut storms = Vec::new();
    let mut current: Option<(Header, Vec<StormRecord>)> = None;
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io("<rsmc input>", e))?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            continue;
        }
        if line.starts_with(HEADER_INDICATOR) {
            if let Some((header, records)) = current.take() {
                storms.push(finish(header, records)?);
            }
            let header = parse_header(line, line_no)?;
            let cap = header.declared;
            current = Some((header, Vec::with_capacity(cap)));
            continue;
        }
        match current.as_mut() {
            Some((header, records)) if records.len() < header.declared => {
                records.push(parse_data(line, line_no)?);
            }
            Some((header, _)) => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!(
                        "storm {} declares {} data lines but more follow",
                        header.storm_id, header.declared
                    ),
                });
            }
            None => {
                return Err(Error::Parse {
                    line: line_no,
                    message: "data line before any header".into(),
                });
            }
        }
    }
    if let Some((header, records)) = current.take() {
        storms.push(finish(header, records)?);
    }
    Ok(storms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{Datelike, Timelike};

    const SAMPLE: &str = "\
66666 9119  003 0045 9119 0 6 MIREILLE                          19920701
91092706 002 5 325 1304  935     095     50180 0140 30400 0260
91092712 002 5 340 1310  940     090     50180 0140 30400 0260         #
91092718 002 6 362 1325  960
66666 5101  002 0001 5101 0 6 GEORGIA                           20000101
51021506 002 2 050 1380 1010
51021512 002 2 053 1375 1008
";

    #[test]
    fn parses_sample() {
        let storms = parse_rsmc(SAMPLE.as_bytes()).unwrap();
        assert_eq!(storms.len(), 2);
        let m = &storms[0];
        assert_eq!(m.storm_id, "9119");
        assert_eq!(m.name, "MIREILLE");
        assert_eq!(m.len(), 3);
        let r = &m.records[0];
        assert_eq!(
            (r.time.year(), r.time.month(), r.time.day(), r.time.hour()),
            (1991, 9, 27, 6)
        );
        assert_eq!(r.grade, Some(5));
        assert_eq!(r.lat, 32.5);
        assert_eq!(r.lon, 130.4);
        assert_eq!(r.central_pressure, Some(935));
        assert_eq!(r.max_wind, Some(95));
        assert_eq!(r.radii.dir_long_50kt, Some(5));
        assert_eq!(r.radii.long_50kt, Some(180));
        assert_eq!(r.radii.short_50kt, Some(140));
        assert_eq!(r.radii.dir_long_30kt, Some(3));
        assert_eq!(r.radii.long_30kt, Some(400));
        assert_eq!(r.radii.short_30kt, Some(260));
        assert!(!r.landfall);
        assert!(m.records[1].landfall);
        assert_eq!(m.records[2].max_wind, None);
        assert_eq!(m.records[2].radii, WindRadii::default());
        let g = &storms[1];
        assert_eq!(g.records[0].time.year(), 1951);
        assert_eq!(g.records[1].lat, 5.3);
    }

    #[test]
    fn year_pivot() {
        let text = "66666 0101  001 0001 0101 0 6 X\n01010100 002 2 100 1400 1000\n";
        assert_eq!(parse_rsmc(text.as_bytes()).unwrap()[0].records[0].time.year(), 2001);
        let text = "66666 5001  001 0001 5001 0 6 X\n50010100 002 2 100 1400 1000\n";
        assert_eq!(parse_rsmc(text.as_bytes()).unwrap()[0].records[0].time.year(), 2050);
    }

    #[test]
    fn empty_stream() {
        assert!(parse_rsmc("".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn zero_record_header_is_invalid() {
        let err = parse_rsmc("66666 9901  000 0001 9901 0 6 EMPTY\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
    }

    #[test]
    fn malformed_count() {
        let err = parse_rsmc("66666 9901  0x3 0001 9901 0 6 BAD\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn bad_latitude_reports_line() {
        let text = SAMPLE.replace("91092712 002 5 340", "91092712 002 5 3?0");
        let err = parse_rsmc(text.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn truncated_block() {
        let text = SAMPLE.replace("66666 9119  003", "66666 9119  004");
        let err = parse_rsmc(text.as_bytes()).unwrap_err();
        assert!(
            matches!(
                err,
                Error::Truncated {
                    declared: 4,
                    found: 3,
                    header_line: 1,
                    ..
                }
            ),
            "{err}"
        );
        let cut: String = SAMPLE.lines().take(6).map(|l| format!("{l}\n")).collect();
        assert!(matches!(parse_rsmc(cut.as_bytes()), Err(Error::Truncated { .. })));
    }

    #[test]
    fn record_count_matches_header() {
        for s in parse_rsmc(SAMPLE.as_bytes()).unwrap() {
            let declared = if s.storm_id == "9119" { 3 } else { 2 };
            assert_eq!(s.len(), declared);
        }
    }
}
