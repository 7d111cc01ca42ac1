//! Great-circle error metric.

use serde::{Deserialize, Serialize};

use crate::regression::TrajectoryForecast;
use crate::{Error, Result};

/// Mean Earth radius in kilometres.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    /// Degrees north.
    pub lat: f64,
    /// Degrees east.
    pub lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Self {
        Self { lat, lon }
    }
}

/// Haversine distance in km on a sphere of radius [`EARTH_RADIUS_KM`].
pub fn haversine(p1: GeoPoint, p2: GeoPoint) -> f64 {
    let phi1 = p1.lat.to_radians();
    let phi2 = p2.lat.to_radians();
    let dphi = phi2 - phi1;
    let dlambda = (p2.lon - p1.lon).to_radians();
    let h = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().clamp(0.0, 1.0).asin()
}

/// Mean pointwise haversine distance between a forecast and the observed points.
pub fn trajectory_error(forecast: &TrajectoryForecast, truth: &[GeoPoint]) -> Result<f64> {
    if forecast.points.len() != truth.len() {
        return Err(Error::Shape(format!(
            "forecast for {} has {} points, truth has {}",
            forecast.storm_id,
            forecast.points.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::Shape("cannot score an empty trajectory".into()));
    }
    let total: f64 = forecast.points.iter().zip(truth).map(|(a, b)| haversine(*a, *b)).sum();
    Ok(total / truth.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Spherical law of cosines, an independent great-circle formula.
    fn cosine_law(p1: GeoPoint, p2: GeoPoint) -> f64 {
        let (a, b) = (p1.lat.to_radians(), p2.lat.to_radians());
        let dl = (p2.lon - p1.lon).to_radians();
        let c = (a.sin() * b.sin() + a.cos() * b.cos() * dl.cos()).clamp(-1.0, 1.0);
        EARTH_RADIUS_KM * c.acos()
    }

    #[test]
    fn identical_points() {
        let p = GeoPoint::new(25.0, 130.0);
        assert_eq!(haversine(p, p), 0.0);
    }

    #[test]
    fn half_great_circle() {
        let d = haversine(GeoPoint::new(0.0, 0.0), GeoPoint::new(0.0, 180.0));
        assert_eq!(d, std::f64::consts::PI * EARTH_RADIUS_KM);
        assert!((d - 20015.086796).abs() < 1e-6);
    }

    #[test]
    fn seoul_tokyo_matches_cosine_law() {
        let seoul = GeoPoint::new(37.5665, 126.9780);
        let tokyo = GeoPoint::new(35.6762, 139.6503);
        let d = haversine(seoul, tokyo);
        let oracle = cosine_law(seoul, tokyo);
        assert!(((d - oracle) / oracle).abs() < 1e-6);
        assert!((d - 1152.0).abs() < 5.0);
    }

    fn forecast(points: Vec<GeoPoint>) -> TrajectoryForecast {
        TrajectoryForecast {
            storm_id: "t".into(),
            points,
        }
    }

    #[test]
    fn trajectory_error_cases() {
        let truth: Vec<GeoPoint> = (0..8)
            .map(|i| GeoPoint::new(20.0 + i as f64, 130.0 + 0.5 * i as f64))
            .collect();
        assert_eq!(trajectory_error(&forecast(truth.clone()), &truth).unwrap(), 0.0);

        let mut one_off = truth.clone();
        one_off[3].lat += 1.0;
        let d = haversine(one_off[3], truth[3]);
        assert!((trajectory_error(&forecast(one_off), &truth).unwrap() - d / 8.0).abs() < 1e-12);

        let shifted: Vec<GeoPoint> = truth.iter().map(|p| GeoPoint::new(p.lat, p.lon + 2.0)).collect();
        let oracle: f64 = truth.iter().zip(&shifted).map(|(a, b)| cosine_law(*a, *b)).sum::<f64>() / 8.0;
        let got = trajectory_error(&forecast(shifted), &truth).unwrap();
        assert!(((got - oracle) / oracle).abs() < 1e-6);

        assert!(trajectory_error(&forecast(truth[..7].to_vec()), &truth).is_err());
    }

    proptest! {
        #[test]
        fn haversine_properties(a in -90.0f64..=90.0, b in 0.0f64..360.0, c in -90.0f64..=90.0, d in 0.0f64..360.0) {
            let p = GeoPoint::new(a, b);
            let q = GeoPoint::new(c, d);
            let pq = haversine(p, q);
            prop_assert_eq!(pq, haversine(q, p));
            prop_assert!(pq >= 0.0);
            prop_assert!(pq <= std::f64::consts::PI * EARTH_RADIUS_KM);
            prop_assert_eq!(haversine(p, p), 0.0);
        }
    }
}
