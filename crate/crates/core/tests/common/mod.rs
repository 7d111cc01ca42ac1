#![allow(dead_code)]

//! Synthetic data generators shared by the integration tests.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trackfda::experiment::GeoPoint;
use trackfda::ingest::TrajectoryWindow;
use trackfda::regression::TrainingConfig;

/// One coordinate of a known linear functional generator:
/// `y = Theta (a + G c)` where `x = Phi c`.
pub struct Generator {
    pub a: DVector<f64>,
    pub g: DMatrix<f64>,
    pub level: f64,
}

pub struct FofData {
    pub windows: Vec<TrajectoryWindow>,
    /// Noise-free response values, `(lat, lon)` per storm.
    pub clean: Vec<(Vec<f64>, Vec<f64>)>,
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; adequate for test noise.
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

impl Generator {
    pub fn random(training: &TrainingConfig, level: f64, rng: &mut ChaCha8Rng) -> Self {
        let (ks, kt) = (training.response_dim, training.predictor_dim);
        let g = DMatrix::from_fn(ks, kt, |_, _| rng.gen_range(-0.15..0.15));
        // Centre the responses near `level` so points stay geographic.
        let centre = &g * DVector::from_element(kt, level);
        let a = DVector::from_fn(ks, |i, _| level - centre[i] + rng.gen_range(-1.0..1.0));
        Self { a, g, level }
    }

    fn sample(&self, phi: &DMatrix<f64>, theta: &DMatrix<f64>, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
        let c = DVector::from_fn(phi.ncols(), |_, _| self.level + rng.gen_range(-3.0..3.0));
        let x = phi * &c;
        let y = theta * (&self.a + &self.g * &c);
        (x.iter().copied().collect(), y.iter().copied().collect())
    }
}

/// `n` windows whose lat and lon segments follow two independent generators,
/// with Gaussian noise of standard deviation `sigma` on the responses.
pub fn fof_data(
    n: usize,
    sigma: f64,
    training: &TrainingConfig,
    generators: &(Generator, Generator),
    seed: u64,
) -> FofData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi = training
        .predictor_basis()
        .unwrap()
        .matrix(&training.predictor_grid())
        .unwrap();
    let theta = training
        .response_basis()
        .unwrap()
        .matrix(&training.response_grid())
        .unwrap();
    let mut windows = Vec::with_capacity(n);
    let mut clean = Vec::with_capacity(n);
    for i in 0..n {
        let (lat_x, lat_y) = generators.0.sample(&phi, &theta, &mut rng);
        let (lon_x, lon_y) = generators.1.sample(&phi, &theta, &mut rng);
        let noisy =
            |y: &[f64], rng: &mut ChaCha8Rng| -> Vec<f64> { y.iter().map(|v| v + sigma * normal(rng)).collect() };
        let lat: Vec<f64> = lat_x.iter().copied().chain(noisy(&lat_y, &mut rng)).collect();
        let lon: Vec<f64> = lon_x.iter().copied().chain(noisy(&lon_y, &mut rng)).collect();
        windows.push(TrajectoryWindow::new(format!("G{i:04}"), lat, lon, training.predictor_len).unwrap());
        clean.push((lat_y, lon_y));
    }
    FofData { windows, clean }
}

pub fn generators(training: &TrainingConfig, seed: u64) -> (Generator, Generator) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (
        Generator::random(training, 20.0, &mut rng),
        Generator::random(training, 135.0, &mut rng),
    )
}

/// Straight-line storms in two regimes. Regime 0 (around 10N, 120E) keeps
/// its heading over the response segment; regime 1 (around 35N, 160E)
/// reverses it. Returns the windows and each storm's regime.
pub fn two_regime(
    n: usize,
    total_len: usize,
    predictor_len: usize,
    noise: f64,
    seed: u64,
) -> (Vec<TrajectoryWindow>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut windows = Vec::with_capacity(n);
    let mut regimes = Vec::with_capacity(n);
    for i in 0..n {
        let regime = i % 2;
        let (lat0, lon0) = if regime == 0 { (10.0, 120.0) } else { (35.0, 160.0) };
        let lat0 = lat0 + rng.gen_range(-2.0..2.0);
        let lon0 = lon0 + rng.gen_range(-2.0..2.0);
        let sign = |rng: &mut ChaCha8Rng| if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let v_lat = sign(&mut rng) * rng.gen_range(0.05..0.2);
        let v_lon = sign(&mut rng) * rng.gen_range(0.05..0.2);
        let last = (predictor_len - 1) as f64;
        let step = |j: usize| {
            let j = j as f64;
            if regime == 1 && j > last {
                2.0 * last - j
            } else {
                j
            }
        };
        let mut lat = Vec::with_capacity(total_len);
        let mut lon = Vec::with_capacity(total_len);
        for j in 0..total_len {
            let s = step(j);
            lat.push(lat0 + v_lat * s + noise * normal(&mut rng));
            lon.push(lon0 + v_lon * s + noise * normal(&mut rng));
        }
        windows.push(TrajectoryWindow::new(format!("R{i:04}"), lat, lon, predictor_len).unwrap());
        regimes.push(regime);
    }
    (windows, regimes)
}

/// Great-circle distance from the angle between unit vectors,
/// `atan2(|u x v|, u . v)`; well conditioned at all separations.
pub fn vector_great_circle_km(p1: GeoPoint, p2: GeoPoint) -> f64 {
    let unit = |p: GeoPoint| {
        let (phi, lambda) = (p.lat.to_radians(), p.lon.to_radians());
        [phi.cos() * lambda.cos(), phi.cos() * lambda.sin(), phi.sin()]
    };
    let (u, v) = (unit(p1), unit(p2));
    let cross = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    let sin = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    let cos = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    6371.0 * sin.atan2(cos)
}

/// Minimum-inertia 2-partition of `points` by enumeration; returns labels
/// with point 0 in cluster 0.
pub fn exhaustive_two_partition(points: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let n = points.len();
    let dim = points[0].len();
    let sse = |members: &[&Vec<f64>]| -> f64 {
        let m = members.len() as f64;
        let mean: Vec<f64> = (0..dim)
            .map(|d| members.iter().map(|p| p[d]).sum::<f64>() / m)
            .collect();
        members
            .iter()
            .map(|p| p.iter().zip(&mean).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
            .sum()
    };
    let mut best = (Vec::new(), f64::INFINITY);
    // Point 0 stays in cluster 0; the mask assigns the rest.
    for mask in 1u32..(1 << (n - 1)) {
        let labels: Vec<usize> = (0..n)
            .map(|i| if i > 0 && mask >> (i - 1) & 1 == 1 { 1 } else { 0 })
            .collect();
        let a: Vec<&Vec<f64>> = points
            .iter()
            .zip(&labels)
            .filter(|(_, &l)| l == 0)
            .map(|(p, _)| p)
            .collect();
        let b: Vec<&Vec<f64>> = points
            .iter()
            .zip(&labels)
            .filter(|(_, &l)| l == 1)
            .map(|(p, _)| p)
            .collect();
        let total = sse(&a) + sse(&b);
        if total < best.1 {
            best = (labels, total);
        }
    }
    best
}

/// Relabels so that point 0 is in cluster 0 (two clusters only).
pub fn canonical_two(labels: &[usize]) -> Vec<usize> {
    labels.iter().map(|&l| usize::from(l != labels[0])).collect()
}

pub fn rms(a: &[f64], b: &[f64]) -> f64 {
    (a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64).sqrt()
}

/// Synthetic storms: `lens[i]` six-hourly records moving along a gentle arc.
pub fn arc_storms(lens: &[usize], seed: u64) -> Vec<trackfda::ingest::StormRecordSet> {
    use chrono::{Duration, TimeZone, Utc};
    use trackfda::ingest::{StormRecord, StormRecordSet};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    lens.iter()
        .enumerate()
        .map(|(i, &n)| {
            let t0 = Utc.with_ymd_and_hms(1990 + (i % 30) as i32, 7, 1, 0, 0, 0).unwrap();
            let (lat0, lon0) = (rng.gen_range(8.0..20.0), rng.gen_range(125.0..155.0));
            let (vlat, vlon) = (rng.gen_range(0.1..0.4), rng.gen_range(-0.5..0.2));
            let curl = rng.gen_range(0.0..0.02);
            StormRecordSet {
                storm_id: format!("{:04}", 9000 + i),
                name: format!("ARC{i}"),
                records: (0..n)
                    .map(|j| {
                        let j = j as f64;
                        // One decimal place, as in the best-track format.
                        let lat = ((lat0 + vlat * j) * 10.0).round() / 10.0;
                        let lon = ((lon0 + vlon * j + curl * j * j) * 10.0).round() / 10.0;
                        let mut r = StormRecord::new(t0 + Duration::hours(6 * j as i64), lat, lon);
                        r.central_pressure = Some(990);
                        r
                    })
                    .collect(),
            }
        })
        .collect()
}

/// Renders storms in the fixed-width best-track layout.
pub fn rsmc_text(storms: &[trackfda::ingest::StormRecordSet]) -> String {
    let mut out = String::new();
    for s in storms {
        out.push_str(&format!(
            "66666 {:>4}  {:03} 0001 {:>4} 0 6 {:<20}          20240101\n",
            s.storm_id,
            s.len(),
            s.storm_id,
            s.name
        ));
        for r in &s.records {
            out.push_str(&format!(
                "{} 002 2 {:03} {:04} {:>4}\n",
                r.time.format("%y%m%d%H"),
                (r.lat * 10.0).round() as i64,
                (r.lon * 10.0).round() as i64,
                r.central_pressure.unwrap_or(1000)
            ));
        }
    }
    out
}
