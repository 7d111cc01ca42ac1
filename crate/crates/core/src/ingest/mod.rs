//! Best-track ingestion: parsing, length filtering, windowing and the
//! `p x n` data matrices (rows are time points, columns are storms).

mod csv;
mod rsmc;

use std::io::{BufRead, Write};

use chrono::{DateTime, Utc};
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use self::csv::{parse_csv, parse_csv_with_warnings, write_csv};
pub use self::rsmc::parse_rsmc;

/// Wind radii in nautical miles. Directions use the RSMC octant code.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct WindRadii {
    pub dir_long_50kt: Option<u8>,
    pub long_50kt: Option<u32>,
    pub short_50kt: Option<u32>,
    pub dir_long_30kt: Option<u8>,
    pub long_30kt: Option<u32>,
    pub short_30kt: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StormRecord {
    pub time: DateTime<Utc>,
    pub grade: Option<u8>,
    /// Degrees north.
    pub lat: f64,
    /// Degrees east in [0, 360).
    pub lon: f64,
    /// hPa.
    pub central_pressure: Option<u32>,
    /// Knots.
    pub max_wind: Option<u32>,
    pub radii: WindRadii,
    pub landfall: bool,
}

impl StormRecord {
    pub fn new(time: DateTime<Utc>, lat: f64, lon: f64) -> Self {
        Self {
            time,
            grade: None,
            lat,
            lon,
            central_pressure: None,
            max_wind: None,
            radii: WindRadii::default(),
            landfall: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StormRecordSet {
    pub storm_id: String,
    pub name: String,
    pub records: Vec<StormRecord>,
}

impl StormRecordSet {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Checks the record invariants shared by every input format.
    pub fn validate(&self) -> Result<()> {
        let id = &self.storm_id;
        if self.records.is_empty() {
            return Err(Error::Validation(format!("storm {id} has no records")));
        }
        for (i, r) in self.records.iter().enumerate() {
            if !(-90.0..=90.0).contains(&r.lat) {
                return Err(Error::Validation(format!(
                    "storm {id} record {i}: latitude {} outside [-90, 90]",
                    r.lat
                )));
            }
            if !(0.0..360.0).contains(&r.lon) {
                return Err(Error::Validation(format!(
                    "storm {id} record {i}: longitude {} outside [0, 360)",
                    r.lon
                )));
            }
        }
        for (i, w) in self.records.windows(2).enumerate() {
            if w[1].time <= w[0].time {
                return Err(Error::Validation(format!(
                    "storm {id}: timestamps not strictly increasing at record {}",
                    i + 1
                )));
            }
            if (w[1].lon - w[0].lon).abs() > 180.0 {
                return Err(Error::Validation(format!(
                    "storm {id}: track crosses the 0/360 meridian at record {}",
                    i + 1
                )));
            }
        }
        Ok(())
    }
}

/// Input format selector for [`parse`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Rsmc,
    Csv,
}

pub fn parse<R: BufRead>(input: R, format: InputFormat) -> Result<Vec<StormRecordSet>> {
    match format {
        InputFormat::Rsmc => parse_rsmc(input),
        InputFormat::Csv => parse_csv(input),
    }
}

/// Storms with at least `min_len` records, in their original order.
pub fn filter_min_length(storms: &[StormRecordSet], min_len: usize) -> Vec<StormRecordSet> {
    storms.iter().filter(|s| s.len() >= min_len).cloned().collect()
}

/// Fixed-length trajectory: `lat`/`lon` hold `L` points, the first
/// `predictor_len` of which form the predictor segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryWindow {
    pub storm_id: String,
    pub lat: Vec<f64>,
    pub lon: Vec<f64>,
    pub predictor_len: usize,
}

impl TrajectoryWindow {
    pub fn new(storm_id: impl Into<String>, lat: Vec<f64>, lon: Vec<f64>, predictor_len: usize) -> Result<Self> {
        let storm_id = storm_id.into();
        if lat.len() != lon.len() {
            return Err(Error::Shape(format!(
                "storm {storm_id}: {} latitudes vs {} longitudes",
                lat.len(),
                lon.len()
            )));
        }
        if predictor_len == 0 || predictor_len >= lat.len() {
            return Err(Error::InvalidArgument(format!(
                "predictor length {predictor_len} must lie in 1..{}",
                lat.len()
            )));
        }
        Ok(Self {
            storm_id,
            lat,
            lon,
            predictor_len,
        })
    }

    pub fn total_len(&self) -> usize {
        self.lat.len()
    }

    pub fn response_len(&self) -> usize {
        self.total_len() - self.predictor_len
    }

    pub fn predictor_lat(&self) -> &[f64] {
        &self.lat[..self.predictor_len]
    }

    pub fn predictor_lon(&self) -> &[f64] {
        &self.lon[..self.predictor_len]
    }

    pub fn response_lat(&self) -> &[f64] {
        &self.lat[self.predictor_len..]
    }

    pub fn response_lon(&self) -> &[f64] {
        &self.lon[self.predictor_len..]
    }
}

/// The final `total_len` records of `storm`.
pub fn extract_tail(storm: &StormRecordSet, total_len: usize, predictor_len: usize) -> Result<TrajectoryWindow> {
    if predictor_len == 0 || predictor_len >= total_len {
        return Err(Error::InvalidArgument(format!(
            "predictor length {predictor_len} must satisfy 0 < P < L = {total_len}"
        )));
    }
    if storm.len() < total_len {
        return Err(Error::TooShort {
            storm_id: storm.storm_id.clone(),
            available: storm.len(),
            required: total_len,
        });
    }
    let tail = &storm.records[storm.len() - total_len..];
    TrajectoryWindow::new(
        storm.storm_id.clone(),
        tail.iter().map(|r| r.lat).collect(),
        tail.iter().map(|r| r.lon).collect(),
        predictor_len,
    )
}

/// Observation indices `1..=total_len` mapped affinely onto [0, 1].
pub fn normalized_grid(total_len: usize) -> Vec<f64> {
    match total_len {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..total_len).map(|j| j as f64 / (total_len - 1) as f64).collect(),
    }
}

/// `p x n` matrix of one coordinate: rows are time points, columns storms.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetMatrix {
    pub values: DMatrix<f64>,
    pub time_grid: Vec<f64>,
    pub storm_ids: Vec<String>,
}

impl DatasetMatrix {
    pub fn new(values: DMatrix<f64>, time_grid: Vec<f64>, storm_ids: Vec<String>) -> Result<Self> {
        if values.nrows() != time_grid.len() {
            return Err(Error::Shape(format!(
                "{} rows but {} time points",
                values.nrows(),
                time_grid.len()
            )));
        }
        if values.ncols() != storm_ids.len() {
            return Err(Error::Shape(format!(
                "{} columns but {} storm ids",
                values.ncols(),
                storm_ids.len()
            )));
        }
        if time_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Shape("time grid must be strictly increasing".into()));
        }
        Ok(Self {
            values,
            time_grid,
            storm_ids,
        })
    }

    pub fn n_points(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_storms(&self) -> usize {
        self.values.ncols()
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        self.values.column(i).iter().copied().collect()
    }

    /// CSV with storm ids as the header row and one row per time point.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = ::csv::Writer::from_writer(out);
        w.write_record(&self.storm_ids)?;
        for row in self.values.row_iter() {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        w.flush().map_err(|e| Error::io("<matrix csv>", e))?;
        Ok(())
    }

    /// Reads the layout written by [`DatasetMatrix::write_csv`]; the time grid
    /// is rebuilt as the normalized index grid.
    pub fn read_csv<R: std::io::Read>(input: R) -> Result<Self> {
        let mut r = ::csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let ids: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
        let mut data = Vec::new();
        let mut rows = 0;
        for rec in r.records() {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            if rec.len() != ids.len() {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {} values, found {}", ids.len(), rec.len()),
                });
            }
            for field in rec.iter() {
                data.push(field.trim().parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    message: format!("'{field}' is not a number"),
                })?);
            }
            rows += 1;
        }
        let values = DMatrix::from_row_slice(rows, ids.len(), &data);
        Self::new(values, normalized_grid(rows), ids)
    }
}

/// Latitude and longitude matrices for windows sharing one `(L, P)`.
pub fn build_matrices(windows: &[TrajectoryWindow]) -> Result<(DatasetMatrix, DatasetMatrix)> {
    let first = windows
        .first()
        .ok_or_else(|| Error::Shape("no trajectory windows to assemble".into()))?;
    let (total, predictor) = (first.total_len(), first.predictor_len);
    if let Some(w) = windows
        .iter()
        .find(|w| w.total_len() != total || w.predictor_len != predictor)
    {
        return Err(Error::Shape(format!(
            "storm {} has (L, P) = ({}, {}), expected ({total}, {predictor})",
            w.storm_id,
            w.total_len(),
            w.predictor_len
        )));
    }
    let n = windows.len();
    let lat = DMatrix::from_fn(total, n, |j, i| windows[i].lat[j]);
    let lon = DMatrix::from_fn(total, n, |j, i| windows[i].lon[j]);
    let ids: Vec<String> = windows.iter().map(|w| w.storm_id.clone()).collect();
    let grid = normalized_grid(total);
    Ok((
        DatasetMatrix::new(lat, grid.clone(), ids.clone())?,
        DatasetMatrix::new(lon, grid, ids)?,
    ))
}

/// Inverse of [`build_matrices`].
pub fn windows_from_matrices(
    lat: &DatasetMatrix,
    lon: &DatasetMatrix,
    predictor_len: usize,
) -> Result<Vec<TrajectoryWindow>> {
    if lat.values.shape() != lon.values.shape() || lat.storm_ids != lon.storm_ids {
        return Err(Error::Shape("latitude and longitude matrices disagree".into()));
    }
    (0..lat.n_storms())
        .map(|i| TrajectoryWindow::new(lat.storm_ids[i].clone(), lat.column(i), lon.column(i), predictor_len))
        .collect()
}

/// Seeded shuffle of `0..n`; the first `floor(ratio * n)` indices train.
///
/// Both index lists are returned sorted.
pub fn train_test_split(n: usize, ratio: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "split ratio {ratio} must lie in (0, 1)"
        )));
    }
    let n_train = (ratio * n as f64).floor() as usize;
    if n < 2 || n_train == 0 || n_train == n {
        return Err(Error::InvalidArgument(format!(
            "ratio {ratio} on {n} storms leaves an empty train or test set"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    let mut train = idx[..n_train].to_vec();
    let mut test = idx[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}
