//! Evaluation metric and experiment harness: global and clustered
//! regression, the cluster grid, repeated simulations and the length study.

mod config;
mod eval;
pub mod geojson;
mod metric;
mod models;
mod report;

pub use config::{ExperimentConfig, KRange};
pub use eval::{
    evaluate_clustered, evaluate_global, grid_search, length_study, repeated_simulation, window_storms, Evaluation,
    GridEvaluator,
};
pub use metric::{haversine, trajectory_error, GeoPoint, EARTH_RADIUS_KM};
pub use models::{
    choose_models, fit_cluster_models, fit_pair_models, ClusterModels, ClusteredModels, CoordinateModels, Forecast,
    ForecastEngine, ModelSet, ModelSource, PairModels, PreparedWindow,
};
pub use report::{BestCell, ExperimentReport, GridTable, LengthStudyEntry, LengthStudyReport, RepetitionTrace};
