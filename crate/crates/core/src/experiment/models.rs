//! Fitted forecasting models: one global pair of coordinate models and,
//! optionally, cluster-pair-local models with a fallback ladder.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::GeoPoint;
use crate::clustering::{kmeans_fit, KMeansModel, KMeansOptions};
use crate::ingest::TrajectoryWindow;
use crate::regression::{fit_coordinate_model, Coordinate, FoFModel, TrainingConfig, TrajectoryForecast};
use crate::smooth::Projector;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordinateModels {
    pub lat: FoFModel,
    pub lon: FoFModel,
}

impl CoordinateModels {
    pub fn fit(windows: &[&TrajectoryWindow], training: &TrainingConfig, ridge: f64) -> Result<Self> {
        Ok(Self {
            lat: fit_coordinate_model(windows, Coordinate::Lat, training, ridge)?,
            lon: fit_coordinate_model(windows, Coordinate::Lon, training, ridge)?,
        })
    }
}

/// Which rung of the fallback ladder produced a coordinate forecast.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSource {
    Pair,
    Cluster,
    Global,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairModels {
    pub lat_cluster: usize,
    pub lon_cluster: usize,
    pub n_members: usize,
    pub models: CoordinateModels,
}

/// Per-cluster models for one coordinate; `None` where the cluster has
/// fewer than the minimum number of training storms.
pub type ClusterModels = Vec<Option<FoFModel>>;

/// Fits one model per cluster of `labels` that has at least `min_size` members.
pub fn fit_cluster_models(
    train: &[&TrajectoryWindow],
    labels: &[usize],
    k: usize,
    coordinate: Coordinate,
    training: &TrainingConfig,
    ridge: f64,
    min_size: usize,
) -> Result<ClusterModels> {
    (0..k)
        .map(|c| {
            let members: Vec<&TrajectoryWindow> = train
                .iter()
                .zip(labels)
                .filter(|(_, &l)| l == c)
                .map(|(w, _)| *w)
                .collect();
            if members.len() >= min_size.max(1) {
                fit_coordinate_model(&members, coordinate, training, ridge).map(Some)
            } else {
                Ok(None)
            }
        })
        .collect()
}

/// Fits the pair-local models for every pair with at least `min_size` members.
pub fn fit_pair_models(
    train: &[&TrajectoryWindow],
    lat_labels: &[usize],
    lon_labels: &[usize],
    training: &TrainingConfig,
    ridge: f64,
    min_size: usize,
) -> Result<Vec<PairModels>> {
    let mut groups: std::collections::BTreeMap<(usize, usize), Vec<&TrajectoryWindow>> = Default::default();
    for (w, (&a, &b)) in train.iter().zip(lat_labels.iter().zip(lon_labels)) {
        groups.entry((a, b)).or_default().push(*w);
    }
    groups
        .into_iter()
        .filter(|(_, members)| members.len() >= min_size.max(1))
        .map(|((a, b), members)| {
            Ok(PairModels {
                lat_cluster: a,
                lon_cluster: b,
                n_members: members.len(),
                models: CoordinateModels::fit(&members, training, ridge)?,
            })
        })
        .collect()
}

/// Picks the lat and lon models for one storm: pair model, else the
/// coordinate's own cluster model, else the global model.
pub fn choose_models<'m>(
    pair: Option<&'m CoordinateModels>,
    lat_cluster: Option<&'m FoFModel>,
    lon_cluster: Option<&'m FoFModel>,
    global: &'m CoordinateModels,
) -> [(&'m FoFModel, ModelSource); 2] {
    if let Some(p) = pair {
        return [(&p.lat, ModelSource::Pair), (&p.lon, ModelSource::Pair)];
    }
    let lat = lat_cluster.map_or((&global.lat, ModelSource::Global), |m| (m, ModelSource::Cluster));
    let lon = lon_cluster.map_or((&global.lon, ModelSource::Global), |m| (m, ModelSource::Cluster));
    [lat, lon]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteredModels {
    pub lat_kmeans: KMeansModel,
    pub lon_kmeans: KMeansModel,
    pub pairs: Vec<PairModels>,
    pub lat_clusters: ClusterModels,
    pub lon_clusters: ClusterModels,
}

impl ClusteredModels {
    pub fn pair(&self, lat_cluster: usize, lon_cluster: usize) -> Option<&PairModels> {
        self.pairs
            .iter()
            .find(|p| p.lat_cluster == lat_cluster && p.lon_cluster == lon_cluster)
    }
}

/// Predictor-segment coefficients of one storm under a training configuration.
#[derive(Debug, Clone)]
pub struct PreparedWindow {
    pub lat_coeffs: DVector<f64>,
    pub lon_coeffs: DVector<f64>,
}

/// Shared projection and response-basis evaluation for many forecasts.
#[derive(Debug, Clone)]
pub struct ForecastEngine {
    training: TrainingConfig,
    projector: Projector,
    response_grid: Vec<f64>,
    theta: DMatrix<f64>,
}

impl ForecastEngine {
    pub fn new(training: &TrainingConfig) -> Result<Self> {
        let response_grid = training.response_grid();
        Ok(Self {
            projector: training.predictor_projector()?,
            theta: training.response_basis()?.matrix(&response_grid)?,
            response_grid,
            training: training.clone(),
        })
    }

    pub fn prepare(&self, window: &TrajectoryWindow) -> Result<PreparedWindow> {
        self.training.check_window(window)?;
        self.prepare_segments(window.predictor_lat(), window.predictor_lon())
    }

    /// Projects bare predictor segments (no response segment needed).
    pub fn prepare_segments(&self, lat: &[f64], lon: &[f64]) -> Result<PreparedWindow> {
        let p = self.training.predictor_len;
        if lat.len() != p || lon.len() != p {
            return Err(Error::Shape(format!(
                "predictor segments have {} and {} points, model expects {p}",
                lat.len(),
                lon.len()
            )));
        }
        Ok(PreparedWindow {
            lat_coeffs: self.projector.fit(lat)?.coefficients,
            lon_coeffs: self.projector.fit(lon)?.coefficients,
        })
    }

    pub fn prepare_all(&self, windows: &[&TrajectoryWindow]) -> Result<Vec<PreparedWindow>> {
        windows.par_iter().map(|w| self.prepare(w)).collect()
    }

    pub fn response_grid(&self) -> &[f64] {
        &self.response_grid
    }

    pub fn predict(&self, lat: &FoFModel, lon: &FoFModel, prepared: &PreparedWindow) -> Result<Vec<GeoPoint>> {
        for m in [lat, lon] {
            if m.response_basis.dim() != self.theta.ncols() {
                return Err(Error::BasisMismatch(
                    "model response basis does not match the engine".into(),
                ));
            }
        }
        let lat_v = &self.theta * lat.response_coefficients(&prepared.lat_coeffs)?;
        let lon_v = &self.theta * lon.response_coefficients(&prepared.lon_coeffs)?;
        Ok(lat_v
            .iter()
            .zip(lon_v.iter())
            .map(|(&lat, &lon)| GeoPoint { lat, lon })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    pub forecast: TrajectoryForecast,
    pub lat_source: ModelSource,
    pub lon_source: ModelSource,
    /// (lat cluster, lon cluster) when clustering is in use.
    pub pair: Option<(usize, usize)>,
}

/// Everything needed to forecast new storms; serializable to JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSet {
    pub training: TrainingConfig,
    pub ridge: f64,
    pub min_cluster_size: usize,
    pub global: CoordinateModels,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clustered: Option<ClusteredModels>,
}

impl ModelSet {
    pub fn fit_global(train: &[&TrajectoryWindow], training: &TrainingConfig, ridge: f64) -> Result<Self> {
        Ok(Self {
            training: training.clone(),
            ridge,
            min_cluster_size: 0,
            global: CoordinateModels::fit(train, training, ridge)?,
            clustered: None,
        })
    }

    #[allow(clippy::too_many_arguments)]
    pub fn fit_clustered(
        train: &[&TrajectoryWindow],
        training: &TrainingConfig,
        ridge: f64,
        k_lat: usize,
        k_lon: usize,
        kmeans: KMeansOptions,
        min_cluster_size: usize,
    ) -> Result<Self> {
        let mut set = Self::fit_global(train, training, ridge)?;
        set.min_cluster_size = min_cluster_size;
        let lat_segments: Vec<&[f64]> = train.iter().map(|w| w.predictor_lat()).collect();
        let lon_segments: Vec<&[f64]> = train.iter().map(|w| w.predictor_lon()).collect();
        let lat_kmeans = kmeans_fit(&lat_segments, k_lat, kmeans)?;
        let lon_kmeans = kmeans_fit(&lon_segments, k_lon, kmeans)?;
        let lat_clusters = fit_cluster_models(
            train,
            &lat_kmeans.labels,
            k_lat,
            Coordinate::Lat,
            training,
            ridge,
            min_cluster_size,
        )?;
        let lon_clusters = fit_cluster_models(
            train,
            &lon_kmeans.labels,
            k_lon,
            Coordinate::Lon,
            training,
            ridge,
            min_cluster_size,
        )?;
        let pairs = fit_pair_models(
            train,
            &lat_kmeans.labels,
            &lon_kmeans.labels,
            training,
            ridge,
            min_cluster_size,
        )?;
        set.clustered = Some(ClusteredModels {
            lat_kmeans,
            lon_kmeans,
            pairs,
            lat_clusters,
            lon_clusters,
        });
        Ok(set)
    }

    pub fn engine(&self) -> Result<ForecastEngine> {
        ForecastEngine::new(&self.training)
    }

    /// Forecast from the predictor segments alone.
    pub fn forecast_segments(
        &self,
        engine: &ForecastEngine,
        storm_id: &str,
        lat_x: &[f64],
        lon_x: &[f64],
    ) -> Result<Forecast> {
        let prepared = engine.prepare_segments(lat_x, lon_x)?;
        let (choice, pair) = match &self.clustered {
            None => (choose_models(None, None, None, &self.global), None),
            Some(c) => {
                let a = c.lat_kmeans.assign(lat_x)?;
                let b = c.lon_kmeans.assign(lon_x)?;
                let choice = choose_models(
                    c.pair(a, b).map(|p| &p.models),
                    c.lat_clusters.get(a).and_then(Option::as_ref),
                    c.lon_clusters.get(b).and_then(Option::as_ref),
                    &self.global,
                );
                (choice, Some((a, b)))
            }
        };
        let [(lat, lat_source), (lon, lon_source)] = choice;
        Ok(Forecast {
            forecast: TrajectoryForecast {
                storm_id: storm_id.to_owned(),
                points: engine.predict(lat, lon, &prepared)?,
            },
            lat_source,
            lon_source,
            pair,
        })
    }

    pub fn forecast_with(&self, engine: &ForecastEngine, window: &TrajectoryWindow) -> Result<Forecast> {
        self.training.check_window(window)?;
        self.forecast_segments(engine, &window.storm_id, window.predictor_lat(), window.predictor_lon())
    }

    pub fn forecast(&self, window: &TrajectoryWindow) -> Result<Forecast> {
        self.forecast_with(&self.engine()?, window)
    }
}
