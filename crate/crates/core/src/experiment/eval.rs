use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, KRange};
use super::metric::{trajectory_error, GeoPoint};
use super::models::{
    choose_models, fit_cluster_models, fit_pair_models, ClusterModels, CoordinateModels, ForecastEngine, PreparedWindow,
};
use super::report::{ExperimentReport, GridTable, LengthStudyEntry, LengthStudyReport, RepetitionTrace};
use crate::clustering::{kmeans_fit, KMeansModel};
use crate::ingest::{extract_tail, filter_min_length, train_test_split, StormRecordSet, TrajectoryWindow};
use crate::regression::{Coordinate, FoFModel, TrainingConfig, TrajectoryForecast};
use crate::{Error, Result};

/// Test-set error of one model configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    /// Unweighted mean over test storms.
    pub mean_km: f64,
    pub per_storm_km: Vec<f64>,
}

fn truth(w: &TrajectoryWindow) -> Vec<GeoPoint> {
    w.response_lat()
        .iter()
        .zip(w.response_lon())
        .map(|(&lat, &lon)| GeoPoint { lat, lon })
        .collect()
}

fn cell_error(k_lat: usize, k_lon: usize, source: Error) -> Error {
    Error::Cell {
        k_lat,
        k_lon,
        repetition: 0,
        source: Box::new(source),
    }
}

fn with_repetition(e: Error, repetition: usize) -> Error {
    match e {
        Error::Cell {
            k_lat, k_lon, source, ..
        } => Error::Cell {
            k_lat,
            k_lon,
            repetition,
            source,
        },
        other => other,
    }
}

/// Projected test storms and their observed response points.
struct TestSet<'a> {
    windows: Vec<&'a TrajectoryWindow>,
    prepared: Vec<PreparedWindow>,
    truth: Vec<Vec<GeoPoint>>,
}

impl<'a> TestSet<'a> {
    fn new(engine: &ForecastEngine, test: &[&'a TrajectoryWindow]) -> Result<Self> {
        if test.is_empty() {
            return Err(Error::InvalidArgument("test set is empty".into()));
        }
        Ok(Self {
            windows: test.to_vec(),
            prepared: engine.prepare_all(test)?,
            truth: test.iter().map(|w| truth(w)).collect(),
        })
    }

    fn score<'m, F>(&self, engine: &ForecastEngine, pick: F) -> Result<Evaluation>
    where
        F: Fn(usize) -> (&'m FoFModel, &'m FoFModel) + Sync,
    {
        let per_storm = (0..self.windows.len())
            .into_par_iter()
            .map(|i| {
                let (lat, lon) = pick(i);
                let forecast = TrajectoryForecast {
                    storm_id: self.windows[i].storm_id.clone(),
                    points: engine.predict(lat, lon, &self.prepared[i])?,
                };
                trajectory_error(&forecast, &self.truth[i])
            })
            .collect::<Result<Vec<f64>>>()?;
        let mean_km = per_storm.iter().sum::<f64>() / per_storm.len() as f64;
        Ok(Evaluation {
            mean_km,
            per_storm_km: per_storm,
        })
    }
}

fn check_split(train: &[&TrajectoryWindow], config: &ExperimentConfig) -> Result<TrainingConfig> {
    config.validate()?;
    if train.is_empty() {
        return Err(Error::InvalidArgument("training set is empty".into()));
    }
    config.training()
}

/// Error of one global lat/lon model pair fitted on all of `train`.
pub fn evaluate_global(
    train: &[&TrajectoryWindow],
    test: &[&TrajectoryWindow],
    config: &ExperimentConfig,
) -> Result<Evaluation> {
    let training = check_split(train, config)?;
    let engine = ForecastEngine::new(&training)?;
    let tests = TestSet::new(&engine, test)?;
    let global = CoordinateModels::fit(train, &training, config.ridge)?;
    tests.score(&engine, |_| (&global.lat, &global.lon))
}

/// Error of cluster-pair-local models for one `(k_lat, k_lon)`, with
/// k-means seeded from `config.seed`.
pub fn evaluate_clustered(
    train: &[&TrajectoryWindow],
    test: &[&TrajectoryWindow],
    k_lat: usize,
    k_lon: usize,
    config: &ExperimentConfig,
) -> Result<Evaluation> {
    let mut cfg = config.clone();
    cfg.k_lat = KRange::single(k_lat);
    cfg.k_lon = KRange::single(k_lon);
    GridEvaluator::new(train, test, &cfg)?.cell(k_lat, k_lon)
}

/// One coordinate's clustering at a fixed k, shared across a grid row or column.
struct CoordinateClustering {
    kmeans: KMeansModel,
    models: ClusterModels,
    test_labels: Vec<usize>,
}

impl CoordinateClustering {
    fn fit(
        coordinate: Coordinate,
        k: usize,
        train: &[&TrajectoryWindow],
        test: &[&TrajectoryWindow],
        training: &TrainingConfig,
        config: &ExperimentConfig,
    ) -> Result<Self> {
        let segments: Vec<&[f64]> = train.iter().map(|w| coordinate.predictor(w)).collect();
        let kmeans = kmeans_fit(&segments, k, config.kmeans_options(config.seed))?;
        let models = fit_cluster_models(
            train,
            &kmeans.labels,
            k,
            coordinate,
            training,
            config.ridge,
            config.min_cluster_size,
        )?;
        let test_labels = test
            .iter()
            .map(|w| kmeans.assign(coordinate.predictor(w)))
            .collect::<Result<_>>()?;
        Ok(Self {
            kmeans,
            models,
            test_labels,
        })
    }
}

/// Shared state for evaluating every cell of a cluster grid on one split:
/// the global models, one k-means per k and coordinate, and the projected
/// test storms. Cells only add the pair-local fits.
pub struct GridEvaluator<'a> {
    config: ExperimentConfig,
    training: TrainingConfig,
    train: Vec<&'a TrajectoryWindow>,
    engine: ForecastEngine,
    tests: TestSet<'a>,
    global: CoordinateModels,
    lat: Vec<CoordinateClustering>,
    lon: Vec<CoordinateClustering>,
}

impl<'a> GridEvaluator<'a> {
    pub fn new(
        train: &[&'a TrajectoryWindow],
        test: &[&'a TrajectoryWindow],
        config: &ExperimentConfig,
    ) -> Result<Self> {
        let training = check_split(train, config)?;
        let engine = ForecastEngine::new(&training)?;
        let tests = TestSet::new(&engine, test)?;
        let global = CoordinateModels::fit(train, &training, config.ridge).map_err(|e| cell_error(1, 1, e))?;

        let fit_all = |coordinate: Coordinate, range: KRange| -> Result<Vec<CoordinateClustering>> {
            let fitted: Vec<Result<CoordinateClustering>> = range
                .values()
                .into_par_iter()
                .map(|k| CoordinateClustering::fit(coordinate, k, train, test, &training, config))
                .collect();
            fitted
                .into_iter()
                .zip(range.values())
                .map(|(r, k)| {
                    r.map_err(|e| match coordinate {
                        Coordinate::Lat => cell_error(k, config.k_lon.min, e),
                        Coordinate::Lon => cell_error(config.k_lat.min, k, e),
                    })
                })
                .collect()
        };
        let lat = fit_all(Coordinate::Lat, config.k_lat)?;
        let lon = fit_all(Coordinate::Lon, config.k_lon)?;
        Ok(Self {
            config: config.clone(),
            training,
            train: train.to_vec(),
            engine,
            tests,
            global,
            lat,
            lon,
        })
    }

    pub fn global(&self) -> Result<Evaluation> {
        self.tests
            .score(&self.engine, |_| (&self.global.lat, &self.global.lon))
            .map_err(|e| cell_error(1, 1, e))
    }

    pub fn lat_kmeans(&self, k: usize) -> Option<&KMeansModel> {
        k.checked_sub(self.config.k_lat.min)
            .and_then(|i| self.lat.get(i))
            .map(|c| &c.kmeans)
    }

    pub fn lon_kmeans(&self, k: usize) -> Option<&KMeansModel> {
        k.checked_sub(self.config.k_lon.min)
            .and_then(|i| self.lon.get(i))
            .map(|c| &c.kmeans)
    }

    fn clusterings(&self, k_lat: usize, k_lon: usize) -> Result<(&CoordinateClustering, &CoordinateClustering)> {
        if !self.config.k_lat.contains(k_lat) || !self.config.k_lon.contains(k_lon) {
            return Err(Error::InvalidArgument(format!(
                "cell ({k_lat}, {k_lon}) lies outside the configured ranges"
            )));
        }
        Ok((
            &self.lat[k_lat - self.config.k_lat.min],
            &self.lon[k_lon - self.config.k_lon.min],
        ))
    }

    /// Clustered test error at one cell, using the fallback ladder.
    pub fn cell(&self, k_lat: usize, k_lon: usize) -> Result<Evaluation> {
        let (lat, lon) = self.clusterings(k_lat, k_lon)?;
        let run = || -> Result<Evaluation> {
            let pairs = fit_pair_models(
                &self.train,
                &lat.kmeans.labels,
                &lon.kmeans.labels,
                &self.training,
                self.config.ridge,
                self.config.min_cluster_size,
            )?;
            let by_pair: BTreeMap<(usize, usize), &CoordinateModels> = pairs
                .iter()
                .map(|p| ((p.lat_cluster, p.lon_cluster), &p.models))
                .collect();
            self.tests.score(&self.engine, |i| {
                let (a, b) = (lat.test_labels[i], lon.test_labels[i]);
                let [(lat_model, _), (lon_model, _)] = choose_models(
                    by_pair.get(&(a, b)).copied(),
                    lat.models[a].as_ref(),
                    lon.models[b].as_ref(),
                    &self.global,
                );
                (lat_model, lon_model)
            })
        };
        run().map_err(|e| cell_error(k_lat, k_lon, e))
    }

    /// Every configured cell plus the global error, for repetition 0.
    fn trace(&self, seed: u64) -> Result<RepetitionTrace> {
        let global_km = self.global()?.mean_km;
        let cells: Vec<(usize, usize)> = self
            .config
            .k_lat
            .values()
            .into_iter()
            .flat_map(|a| self.config.k_lon.values().into_iter().map(move |b| (a, b)))
            .collect();
        let results: Vec<Result<Evaluation>> = cells.par_iter().map(|&(a, b)| self.cell(a, b)).collect();
        let mut grid = GridTable::filled(self.config.k_lat, self.config.k_lon, 0.0);
        for (&(a, b), r) in cells.iter().zip(results) {
            grid.set(a, b, r?.mean_km);
        }
        Ok(RepetitionTrace {
            repetition: 0,
            seed,
            n_train: self.train.len(),
            n_test: self.tests.windows.len(),
            global_km,
            best: grid.best(),
            grid,
        })
    }
}

fn run_repetition(
    train: &[&TrajectoryWindow],
    test: &[&TrajectoryWindow],
    config: &ExperimentConfig,
    repetition: usize,
) -> Result<RepetitionTrace> {
    let trace = GridEvaluator::new(train, test, config)
        .and_then(|g| g.trace(config.seed))
        .map_err(|e| with_repetition(e, repetition))?;
    Ok(RepetitionTrace { repetition, ..trace })
}

/// Evaluates every `(k_lat, k_lon)` in the configured ranges on one split.
pub fn grid_search(
    train: &[&TrajectoryWindow],
    test: &[&TrajectoryWindow],
    config: &ExperimentConfig,
) -> Result<ExperimentReport> {
    let trace = run_repetition(train, test, config, 0)?;
    ExperimentReport::aggregate(config.clone(), train.len() + test.len(), vec![trace])
}

/// Repeats split, grid search and global evaluation with seeds
/// `seed + r`; the best cell is chosen after averaging.
pub fn repeated_simulation(windows: &[TrajectoryWindow], config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let mut traces = Vec::with_capacity(config.n_repetitions);
    for r in 0..config.n_repetitions {
        let seed = config.seed.wrapping_add(r as u64);
        let (train_idx, test_idx) = train_test_split(windows.len(), config.train_ratio, seed)?;
        let train: Vec<&TrajectoryWindow> = train_idx.iter().map(|&i| &windows[i]).collect();
        let test: Vec<&TrajectoryWindow> = test_idx.iter().map(|&i| &windows[i]).collect();
        let cfg = ExperimentConfig { seed, ..config.clone() };
        traces.push(run_repetition(&train, &test, &cfg, r)?);
        log::info!("repetition {} of {} done", r + 1, config.n_repetitions);
    }
    ExperimentReport::aggregate(config.clone(), windows.len(), traces)
}

/// Tail windows of every storm with at least `total_len` records, in input order.
pub fn window_storms(
    storms: &[StormRecordSet],
    total_len: usize,
    predictor_len: usize,
) -> Result<Vec<TrajectoryWindow>> {
    filter_min_length(storms, total_len)
        .iter()
        .map(|s| extract_tail(s, total_len, predictor_len))
        .collect()
}

/// For each subset "storms with at least `m` records" (`m` in `lengths`),
/// runs [`repeated_simulation`] at every length `L <= m`, keeping the
/// response length of `config` fixed.
pub fn length_study(
    storms: &[StormRecordSet],
    lengths: &[usize],
    config: &ExperimentConfig,
) -> Result<LengthStudyReport> {
    config.validate()?;
    let response_len = config.response_len();
    let mut lengths = lengths.to_vec();
    lengths.sort_unstable();
    lengths.dedup();
    if let Some(&l) = lengths.iter().find(|&&l| l <= response_len) {
        return Err(Error::InvalidArgument(format!(
            "length {l} leaves no predictor points with response length {response_len}"
        )));
    }
    let mut entries = Vec::new();
    for &min_len in &lengths {
        let subset = filter_min_length(storms, min_len);
        for &total_len in lengths.iter().filter(|&&l| l <= min_len) {
            let cfg = ExperimentConfig {
                total_len,
                predictor_len: total_len - response_len,
                ..config.clone()
            };
            let windows = window_storms(&subset, total_len, cfg.predictor_len)?;
            let report = repeated_simulation(&windows, &cfg)?;
            entries.push(LengthStudyEntry {
                min_len,
                data_size: subset.len(),
                total_len,
                predictor_len: cfg.predictor_len,
                report,
            });
        }
    }
    Ok(LengthStudyReport { lengths, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Straight-line storms with random start, heading and speed.
    fn windows(n: usize, seed: u64) -> Vec<TrajectoryWindow> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| {
                let (lat0, lon0) = (rng.gen_range(10.0..30.0), rng.gen_range(120.0..150.0));
                let (dlat, dlon) = (rng.gen_range(0.1..0.5), rng.gen_range(-0.5..0.5));
                let lat = (0..32).map(|j| lat0 + dlat * j as f64).collect();
                let lon = (0..32)
                    .map(|j| lon0 + dlon * j as f64 + 0.01 * (j * j) as f64)
                    .collect();
                TrajectoryWindow::new(format!("S{i}"), lat, lon, 24).unwrap()
            })
            .collect()
    }

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            k_lat: KRange::new(1, 3),
            k_lon: KRange::new(1, 2),
            n_repetitions: 2,
            min_cluster_size: 5,
            kmeans_restarts: 3,
            ..ExperimentConfig::default()
        }
    }

    fn split(w: &[TrajectoryWindow], n_train: usize) -> (Vec<&TrajectoryWindow>, Vec<&TrajectoryWindow>) {
        (w[..n_train].iter().collect(), w[n_train..].iter().collect())
    }

    #[test]
    fn linear_tracks_are_nearly_exact() {
        let w = windows(60, 1);
        let (train, test) = split(&w, 48);
        let e = evaluate_global(&train, &test, &small_config()).unwrap();
        assert_eq!(e.per_storm_km.len(), 12);
        assert!(e.mean_km < 1.0, "{}", e.mean_km);
    }

    #[test]
    fn single_test_storm_mean_is_its_error() {
        let w = windows(30, 2);
        let (train, test) = split(&w, 29);
        let e = evaluate_global(&train, &test, &small_config()).unwrap();
        assert_eq!(e.mean_km, e.per_storm_km[0]);
    }

    #[test]
    fn one_by_one_cell_is_global() {
        let w = windows(50, 3);
        let (train, test) = split(&w, 40);
        let cfg = small_config();
        let g = evaluate_global(&train, &test, &cfg).unwrap();
        let c = evaluate_clustered(&train, &test, 1, 1, &cfg).unwrap();
        assert_eq!(g.mean_km.to_bits(), c.mean_km.to_bits());
        assert_eq!(g, c);
    }

    #[test]
    fn grid_shape_and_identity() {
        let w = windows(50, 4);
        let (train, test) = split(&w, 40);
        let cfg = small_config();
        let rep = grid_search(&train, &test, &cfg).unwrap();
        assert_eq!(rep.mean.n_cells(), 6);
        assert_eq!(rep.mean.get(1, 1), Some(rep.global_mean_km));
        assert!(rep.mean.km.iter().flatten().all(|&v| v >= 0.0));
        assert_eq!(rep.best, rep.mean.best());
        let cell = evaluate_clustered(&train, &test, 3, 2, &cfg).unwrap();
        assert_eq!(rep.mean.get(3, 2), Some(cell.mean_km));
    }

    #[test]
    fn one_repetition_equals_grid_search() {
        let w = windows(40, 5);
        let cfg = ExperimentConfig {
            n_repetitions: 1,
            ..small_config()
        };
        let rep = repeated_simulation(&w, &cfg).unwrap();
        let (tr, te) = train_test_split(w.len(), cfg.train_ratio, cfg.seed).unwrap();
        let train: Vec<_> = tr.iter().map(|&i| &w[i]).collect();
        let test: Vec<_> = te.iter().map(|&i| &w[i]).collect();
        assert_eq!(rep, grid_search(&train, &test, &cfg).unwrap());
    }

    #[test]
    fn repetitions_are_deterministic_and_identity_holds() {
        let w = windows(40, 6);
        let cfg = small_config();
        let a = repeated_simulation(&w, &cfg).unwrap();
        assert_eq!(a, repeated_simulation(&w, &cfg).unwrap());
        assert_eq!(a.repetitions.len(), 2);
        assert_eq!(a.repetitions[1].seed, cfg.seed + 1);
        for t in &a.repetitions {
            assert_eq!(t.grid.get(1, 1).unwrap().to_bits(), t.global_km.to_bits());
        }
    }

    #[test]
    fn invalid_cell_and_empty_sets() {
        let w = windows(20, 7);
        let (train, test) = split(&w, 15);
        let cfg = small_config();
        let g = GridEvaluator::new(&train, &test, &cfg).unwrap();
        assert!(matches!(g.cell(4, 1), Err(Error::InvalidArgument(_))));
        assert!(g.lat_kmeans(3).is_some() && g.lat_kmeans(4).is_none());
        assert!(evaluate_global(&train, &[], &cfg).is_err());
        assert!(evaluate_global(&[], &test, &cfg).is_err());
    }

    #[test]
    fn numerical_failure_names_the_cell() {
        let w = windows(20, 8);
        let (train, test) = split(&w, 15);
        // 15 storms at P=24 cannot fit 78 unknowns without a ridge.
        let cfg = ExperimentConfig {
            ridge: 0.0,
            min_cluster_size: 1,
            ..small_config()
        };
        let err = evaluate_clustered(&train, &test, 2, 1, &cfg).unwrap_err();
        assert!(err.is_numerical(), "{err}");
        assert!(matches!(err, Error::Cell { k_lat: 1, k_lon: 1, .. }), "{err}");
    }

    #[test]
    fn length_study_layout() {
        use crate::ingest::tests::storm;
        let storms: Vec<_> = (0..36).map(|i| storm(&format!("S{i}"), 20 + i)).collect();
        let cfg = ExperimentConfig {
            total_len: 16,
            predictor_len: 12,
            k_t: 6,
            k_s: 4,
            ridge: 1e-6,
            k_lat: KRange::single(1),
            k_lon: KRange::new(1, 2),
            n_repetitions: 1,
            min_cluster_size: 3,
            ..ExperimentConfig::default()
        };
        let rep = length_study(&storms, &[40, 24, 32], &cfg).unwrap();
        assert_eq!(rep.lengths, vec![24, 32, 40]);
        assert_eq!(rep.entries.len(), 6);
        let sizes: Vec<usize> = rep.entries.iter().map(|e| e.data_size).collect();
        assert_eq!(sizes, vec![32, 24, 24, 16, 16, 16]);
        assert!(rep.entries.iter().all(|e| e.total_len - e.predictor_len == 4));
        assert!(rep.entry(32, 40).is_none());
        let csv = rep.to_csv();
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.lines().nth(1).unwrap().ends_with(",-,-"));
        assert!(length_study(&storms, &[4], &cfg).is_err());
    }
}
