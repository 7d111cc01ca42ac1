//! CSV trajectory interchange: `storm_id,time,lat,lon[,grade,pressure,wind]`.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use chrono::{DateTime, NaiveDateTime, TimeZone, Utc};
use log::warn;

use super::{StormRecord, StormRecordSet};
use crate::{Error, Result};

const REQUIRED: [&str; 4] = ["storm_id", "time", "lat", "lon"];
const TIME_FORMAT: &str = "%Y-%m-%dT%H:%M:%SZ";

fn parse_time(raw: &str) -> Option<DateTime<Utc>> {
    if let Ok(t) = DateTime::parse_from_rfc3339(raw) {
        return Some(t.with_timezone(&Utc));
    }
    ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%d %H:%M", "%Y%m%d%H"]
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(raw, f).ok())
        .map(|n| Utc.from_utc_datetime(&n))
}

/// Parses a CSV trajectory file, returning storms plus any warnings raised
/// while repairing row order.
///
/// Storms appear in order of first occurrence. Rows of one storm that are
/// out of time order are stably sorted by time with a warning; duplicate
/// timestamps remain a validation error.
pub fn parse_csv_with_warnings<R: BufRead>(input: R) -> Result<(Vec<StormRecordSet>, Vec<String>)> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);
    let headers = reader.headers()?.clone();
    let column = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let mut idx = [0usize; 4];
    for (slot, name) in idx.iter_mut().zip(REQUIRED) {
        *slot = column(name).ok_or_else(|| Error::Schema(format!("missing required column '{name}'")))?;
    }
    let [id_col, time_col, lat_col, lon_col] = idx;
    let grade_col = column("grade");
    let pressure_col = column("pressure");
    let wind_col = column("wind");

    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, Vec<StormRecord>> = HashMap::new();
    for rec in reader.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let get = |i: usize| rec.get(i).unwrap_or("");
        let bad = |what: &str, raw: &str| Error::Parse {
            line,
            message: format!("{what} '{raw}' is not valid"),
        };
        let opt_num = |col: Option<usize>, what: &str| -> Result<Option<u32>> {
            match col.map(get).filter(|s| !s.is_empty()) {
                None => Ok(None),
                Some(raw) => raw
                    .parse::<f64>()
                    .map(|v| Some(v.round() as u32))
                    .map_err(|_| bad(what, raw)),
            }
        };

        let id = get(id_col);
        if id.is_empty() {
            return Err(bad("storm_id", id));
        }
        let time = parse_time(get(time_col)).ok_or_else(|| bad("time", get(time_col)))?;
        let lat: f64 = get(lat_col).parse().map_err(|_| bad("lat", get(lat_col)))?;
        let lon: f64 = get(lon_col).parse().map_err(|_| bad("lon", get(lon_col)))?;
        let mut record = StormRecord::new(time, lat, lon);
        record.grade = opt_num(grade_col, "grade")?.map(|g| g as u8);
        record.central_pressure = opt_num(pressure_col, "pressure")?;
        record.max_wind = opt_num(wind_col, "wind")?;

        groups
            .entry(id.to_owned())
            .or_insert_with(|| {
                order.push(id.to_owned());
                Vec::new()
            })
            .push(record);
    }

    let mut warnings = Vec::new();
    let mut storms = Vec::with_capacity(order.len());
    for id in order {
        let mut records = groups.remove(&id).unwrap_or_default();
        if records.windows(2).any(|w| w[1].time < w[0].time) {
            records.sort_by_key(|r| r.time);
            let msg = format!("storm {id}: rows were out of time order and have been sorted");
            warn!("{msg}");
            warnings.push(msg);
        }
        let storm = StormRecordSet {
            storm_id: id,
            name: String::new(),
            records,
        };
        storm.validate()?;
        storms.push(storm);
    }
    Ok((storms, warnings))
}

pub fn parse_csv<R: BufRead>(input: R) -> Result<Vec<StormRecordSet>> {
    parse_csv_with_warnings(input).map(|(storms, _)| storms)
}

pub fn write_csv<W: Write>(storms: &[StormRecordSet], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["storm_id", "time", "lat", "lon", "grade", "pressure", "wind"])?;
    let opt = |v: Option<u32>| v.map(|v| v.to_string()).unwrap_or_default();
    for s in storms {
        for r in &s.records {
            w.write_record([
                s.storm_id.clone(),
                r.time.format(TIME_FORMAT).to_string(),
                r.lat.to_string(),
                r.lon.to_string(),
                opt(r.grade.map(u32::from)),
                opt(r.central_pressure),
                opt(r.max_wind),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<trajectory csv>", e))?;
    Ok(())
}
