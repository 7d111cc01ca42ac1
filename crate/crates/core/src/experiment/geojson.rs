//! GeoJSON export of forecasts for external mapping tools.
//!
//! Each storm contributes up to three `LineString` features tagged by the
//! `segment` property: `observed_x`, `observed_y` (only when the truth is
//! known) and `predicted_y`. The predicted feature carries `avg_dist_km`
//! whenever the truth is present. Longitudes are written in (-180, 180].

use serde_json::{json, Map, Value};

use super::metric::{trajectory_error, GeoPoint};
use crate::regression::TrajectoryForecast;
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct StormExport {
    pub storm_id: String,
    pub observed_x: Vec<GeoPoint>,
    pub observed_y: Option<Vec<GeoPoint>>,
    pub predicted_y: Vec<GeoPoint>,
}

impl StormExport {
    /// Mean great-circle error of the prediction, when the truth is known.
    pub fn avg_dist_km(&self) -> Result<Option<f64>> {
        let Some(truth) = &self.observed_y else {
            return Ok(None);
        };
        let forecast = TrajectoryForecast {
            storm_id: self.storm_id.clone(),
            points: self.predicted_y.clone(),
        };
        trajectory_error(&forecast, truth).map(Some)
    }
}

fn wrap_lon(lon: f64) -> f64 {
    let l = lon.rem_euclid(360.0);
    if l > 180.0 {
        l - 360.0
    } else {
        l
    }
}

fn line(storm_id: &str, segment: &str, points: &[GeoPoint], extra: Option<(&str, f64)>) -> Value {
    let coords: Vec<[f64; 2]> = points.iter().map(|p| [wrap_lon(p.lon), p.lat]).collect();
    let mut props = Map::new();
    props.insert("storm_id".into(), json!(storm_id));
    props.insert("segment".into(), json!(segment));
    if let Some((k, v)) = extra {
        props.insert(k.into(), json!(v));
    }
    json!({
        "type": "Feature",
        "properties": props,
        "geometry": { "type": "LineString", "coordinates": coords },
    })
}

pub fn feature_collection(storms: &[StormExport]) -> Result<Value> {
    let mut features = Vec::with_capacity(storms.len() * 3);
    for s in storms {
        features.push(line(&s.storm_id, "observed_x", &s.observed_x, None));
        if let Some(y) = &s.observed_y {
            features.push(line(&s.storm_id, "observed_y", y, None));
        }
        let err = s.avg_dist_km()?.map(|d| ("avg_dist_km", d));
        features.push(line(&s.storm_id, "predicted_y", &s.predicted_y, err));
    }
    Ok(json!({ "type": "FeatureCollection", "features": features }))
}
