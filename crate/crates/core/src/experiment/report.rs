use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, KRange};
use crate::{Error, Result};

/// Mean error (km) per `(k_lat, k_lon)` cell, stored `km[lat index][lon index]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridTable {
    pub k_lat: KRange,
    pub k_lon: KRange,
    pub km: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BestCell {
    pub k_lat: usize,
    pub k_lon: usize,
    pub km: f64,
}

impl GridTable {
    pub fn filled(k_lat: KRange, k_lon: KRange, value: f64) -> Self {
        Self {
            k_lat,
            k_lon,
            km: vec![vec![value; k_lon.len()]; k_lat.len()],
        }
    }

    pub fn get(&self, k_lat: usize, k_lon: usize) -> Option<f64> {
        if !self.k_lat.contains(k_lat) || !self.k_lon.contains(k_lon) {
            return None;
        }
        Some(self.km[k_lat - self.k_lat.min][k_lon - self.k_lon.min])
    }

    pub fn set(&mut self, k_lat: usize, k_lon: usize, value: f64) {
        self.km[k_lat - self.k_lat.min][k_lon - self.k_lon.min] = value;
    }

    pub fn n_cells(&self) -> usize {
        self.k_lat.len() * self.k_lon.len()
    }

    /// Minimum cell; ties go to the smallest `(k_lat, k_lon)`.
    pub fn best(&self) -> BestCell {
        let mut best = BestCell {
            k_lat: self.k_lat.min,
            k_lon: self.k_lon.min,
            km: f64::INFINITY,
        };
        for k_lat in self.k_lat.values() {
            for k_lon in self.k_lon.values() {
                let km = self.km[k_lat - self.k_lat.min][k_lon - self.k_lon.min];
                if km < best.km {
                    best = BestCell { k_lat, k_lon, km };
                }
            }
        }
        best
    }

    /// Rows are `k_lon`, columns are `k_lat`, values to 2 decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k_lon\\k_lat");
        for k_lat in self.k_lat.values() {
            let _ = write!(out, ",{k_lat}");
        }
        out.push('\n');
        for k_lon in self.k_lon.values() {
            let _ = write!(out, "{k_lon}");
            for k_lat in self.k_lat.values() {
                let _ = write!(out, ",{:.2}", self.km[k_lat - self.k_lat.min][k_lon - self.k_lon.min]);
            }
            out.push('\n');
        }
        out
    }
}

/// One split of a repeated simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionTrace {
    pub repetition: usize,
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    pub global_km: f64,
    pub grid: GridTable,
    pub best: BestCell,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub dataset_size: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub global_mean_km: f64,
    pub global_std_km: f64,
    /// Per-cell mean over repetitions.
    pub mean: GridTable,
    /// Per-cell population standard deviation over repetitions.
    pub std: GridTable,
    /// Best cell of `mean`.
    pub best: BestCell,
    pub repetitions: Vec<RepetitionTrace>,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

impl ExperimentReport {
    /// Aggregates repetitions cell by cell.
    pub fn aggregate(config: ExperimentConfig, dataset_size: usize, repetitions: Vec<RepetitionTrace>) -> Result<Self> {
        let first = repetitions
            .first()
            .ok_or_else(|| Error::InvalidArgument("no repetitions to aggregate".into()))?;
        let (k_lat, k_lon) = (first.grid.k_lat, first.grid.k_lon);
        let mut mean = GridTable::filled(k_lat, k_lon, 0.0);
        let mut std = mean.clone();
        for a in k_lat.values() {
            for b in k_lon.values() {
                let cell: Vec<f64> = repetitions
                    .iter()
                    .map(|r| r.grid.get(a, b).unwrap_or(f64::NAN))
                    .collect();
                let (m, s) = mean_std(&cell);
                mean.set(a, b, m);
                std.set(a, b, s);
            }
        }
        let global: Vec<f64> = repetitions.iter().map(|r| r.global_km).collect();
        let (global_mean_km, global_std_km) = mean_std(&global);
        Ok(Self {
            config,
            dataset_size,
            n_train: first.n_train,
            n_test: first.n_test,
            global_mean_km,
            global_std_km,
            best: mean.best(),
            mean,
            std,
            repetitions,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn summary_line(&self) -> String {
        format!(
            "best k_lat={} k_lon={} mean_km={:.2} global_km={:.2} storms={} repetitions={}",
            self.best.k_lat,
            self.best.k_lon,
            self.best.km,
            self.global_mean_km,
            self.dataset_size,
            self.repetitions.len()
        )
    }
}

/// One `(subset, length)` cell of the length study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthStudyEntry {
    /// Storms in the subset were filtered to at least this many records.
    pub min_len: usize,
    pub data_size: usize,
    pub total_len: usize,
    pub predictor_len: usize,
    pub report: ExperimentReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthStudyReport {
    pub lengths: Vec<usize>,
    pub entries: Vec<LengthStudyEntry>,
}

impl LengthStudyReport {
    pub fn entry(&self, min_len: usize, total_len: usize) -> Option<&LengthStudyEntry> {
        self.entries
            .iter()
            .find(|e| e.min_len == min_len && e.total_len == total_len)
    }

    /// Best clustered error per subset (rows) and length (columns); `-`
    /// where the length exceeds the subset's minimum.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("data_size,min_len");
        for l in &self.lengths {
            let _ = write!(out, ",{l}");
        }
        out.push('\n');
        for &min_len in &self.lengths {
            let size = self
                .entries
                .iter()
                .find(|e| e.min_len == min_len)
                .map_or(0, |e| e.data_size);
            let _ = write!(out, "{size},{min_len}");
            for &l in &self.lengths {
                match self.entry(min_len, l) {
                    Some(e) => {
                        let _ = write!(out, ",{:.2}", e.report.best.km);
                    }
                    None => out.push_str(",-"),
                }
            }
            out.push('\n');
        }
        out
    }
}
