use serde::{Deserialize, Serialize};

use crate::clustering::KMeansOptions;
use crate::regression::{TrainingConfig, DEFAULT_RIDGE};
use crate::{Error, Result};

/// Inclusive range of cluster counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KRange {
    pub min: usize,
    pub max: usize,
}

impl KRange {
    pub fn new(min: usize, max: usize) -> Self {
        Self { min, max }
    }

    pub fn single(k: usize) -> Self {
        Self { min: k, max: k }
    }

    pub fn values(&self) -> Vec<usize> {
        (self.min..=self.max).collect()
    }

    pub fn len(&self) -> usize {
        self.max + 1 - self.min
    }

    pub fn is_empty(&self) -> bool {
        self.max < self.min
    }

    pub fn contains(&self, k: usize) -> bool {
        (self.min..=self.max).contains(&k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub total_len: usize,
    pub predictor_len: usize,
    pub train_ratio: f64,
    pub seed: u64,
    /// Predictor basis dimension.
    pub k_t: usize,
    /// Response basis dimension.
    pub k_s: usize,
    pub basis_order: usize,
    /// Ridge on the coefficient surface.
    pub ridge: f64,
    /// Ridge used when representing predictor segments.
    pub fit_ridge: f64,
    pub k_lat: KRange,
    pub k_lon: KRange,
    pub n_repetitions: usize,
    pub min_cluster_size: usize,
    pub kmeans_max_iter: usize,
    pub kmeans_restarts: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            total_len: 32,
            predictor_len: 24,
            train_ratio: 0.8,
            seed: 42,
            k_t: 12,
            k_s: 6,
            basis_order: 4,
            ridge: DEFAULT_RIDGE,
            fit_ridge: 0.0,
            k_lat: KRange::new(1, 10),
            k_lon: KRange::new(1, 10),
            n_repetitions: 10,
            min_cluster_size: 15,
            kmeans_max_iter: 100,
            kmeans_restarts: 10,
        }
    }
}

impl ExperimentConfig {
    pub fn response_len(&self) -> usize {
        self.total_len.saturating_sub(self.predictor_len)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidArgument(m));
        if self.predictor_len == 0 || self.predictor_len >= self.total_len {
            return fail(format!(
                "predictor length {} must satisfy 0 < P < L = {}",
                self.predictor_len, self.total_len
            ));
        }
        if !(self.train_ratio > 0.0 && self.train_ratio < 1.0) {
            return fail(format!("train ratio {} must lie in (0, 1)", self.train_ratio));
        }
        if self.n_repetitions == 0 {
            return fail("at least one repetition is required".into());
        }
        for (name, r) in [("k-lat", self.k_lat), ("k-lon", self.k_lon)] {
            if r.min == 0 || r.is_empty() {
                return fail(format!(
                    "{name} range {}..{} must be non-empty and start at 1 or above",
                    r.min, r.max
                ));
            }
        }
        if self.k_t < self.basis_order || self.k_s < self.basis_order {
            return fail(format!(
                "basis dimensions ({}, {}) must be at least the order {}",
                self.k_t, self.k_s, self.basis_order
            ));
        }
        if [self.ridge, self.fit_ridge].iter().any(|r| r.is_nan() || *r < 0.0) {
            return fail("ridge penalties must be non-negative".into());
        }
        Ok(())
    }

    pub fn training(&self) -> Result<TrainingConfig> {
        let mut t = TrainingConfig::new(self.total_len, self.predictor_len)?;
        t.predictor_dim = self.k_t;
        t.response_dim = self.k_s;
        t.order = self.basis_order;
        t.fit_ridge = self.fit_ridge;
        Ok(t)
    }

    pub fn kmeans_options(&self, seed: u64) -> KMeansOptions {
        KMeansOptions {
            seed,
            max_iter: self.kmeans_max_iter,
            n_restarts: self.kmeans_restarts,
        }
    }
}
