//! k-means over discretized predictor segments.
//!
//! Lloyd iterations with k-means++ seeding and several restarts; the restart
//! with the lowest inertia wins. Points are processed in lexicographic order
//! internally, so the partition does not depend on input order.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ingest::TrajectoryWindow;
use crate::matrix_doc::row_major;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KMeansOptions {
    pub seed: u64,
    pub max_iter: usize,
    pub n_restarts: usize,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            max_iter: 100,
            n_restarts: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansModel {
    pub k: usize,
    /// Segment length.
    #[serde(rename = "P")]
    pub dim: usize,
    pub seed: u64,
    /// `k x P`, one centroid per row.
    #[serde(with = "row_major")]
    pub centroids: DMatrix<f64>,
    pub inertia: f64,
    pub iterations_run: usize,
    /// Training labels at the returned state (not serialized).
    #[serde(skip)]
    pub labels: Vec<usize>,
    /// Inertia after each assignment step of the winning restart.
    #[serde(skip)]
    pub inertia_trace: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(centroids: &[Vec<f64>], p: &[f64]) -> (usize, f64) {
    let mut best = (0, sq_dist(&centroids[0], p));
    for (j, c) in centroids.iter().enumerate().skip(1) {
        let d = sq_dist(c, p);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

struct Run {
    centroids: Vec<Vec<f64>>,
    labels: Vec<usize>,
    inertia: f64,
    trace: Vec<f64>,
    iterations: usize,
}

fn plus_plus(points: &[&[f64]], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centroids = vec![points[rng.gen_range(0..n)].to_vec()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if d > 0.0 && acc > target {
                    chosen = Some(i);
                    break;
                }
            }
            chosen.unwrap_or_else(|| d2.iter().rposition(|&d| d > 0.0).unwrap())
        } else {
            rng.gen_range(0..n)
        };
        let c = points[pick].to_vec();
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

fn update(points: &[&[f64]], labels: &[usize], dists: &[f64], k: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &l) in points.iter().zip(labels) {
        counts[l] += 1;
        for (s, v) in sums[l].iter_mut().zip(p.iter()) {
            *s += v;
        }
    }
    let mut taken = vec![false; points.len()];
    for j in 0..k {
        if counts[j] > 0 {
            let c = counts[j] as f64;
            sums[j].iter_mut().for_each(|s| *s /= c);
        } else {
            // Empty cluster: move it onto the worst-served point.
            let mut far = None;
            for (i, &d) in dists.iter().enumerate() {
                if !taken[i] && far.is_none_or(|(_, best)| d > best) {
                    far = Some((i, d));
                }
            }
            if let Some((i, _)) = far {
                taken[i] = true;
                sums[j] = points[i].to_vec();
            }
        }
    }
    sums
}

fn lloyd(points: &[&[f64]], k: usize, seed: u64, max_iter: usize) -> Run {
    let dim = points[0].len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = plus_plus(points, k, &mut rng);
    let mut labels: Vec<usize> = Vec::new();
    let mut trace = Vec::new();
    let mut inertia = f64::INFINITY;
    let mut iterations = 0;
    for iter in 0..max_iter.max(1) {
        let (new_labels, dists): (Vec<usize>, Vec<f64>) = points.iter().map(|p| nearest(&centroids, p)).unzip();
        inertia = dists.iter().sum();
        trace.push(inertia);
        iterations = iter + 1;
        if new_labels == labels {
            break;
        }
        labels = new_labels;
        if iter + 1 == max_iter {
            break;
        }
        centroids = update(points, &labels, &dists, k, dim);
    }
    Run {
        centroids,
        labels,
        inertia,
        trace,
        iterations,
    }
}

/// Fits `k` centroids to `segments` (all of equal length).
pub fn kmeans_fit<S: AsRef<[f64]> + Sync>(segments: &[S], k: usize, options: KMeansOptions) -> Result<KMeansModel> {
    let n = segments.len();
    if k < 1 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if k > n {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds the {n} segments")));
    }
    let dim = segments[0].as_ref().len();
    if dim == 0 || segments.iter().any(|s| s.as_ref().len() != dim) {
        return Err(Error::Shape("segments must share one non-zero length".into()));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (a, b) = (segments[a].as_ref(), segments[b].as_ref());
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let sorted: Vec<&[f64]> = order.iter().map(|&i| segments[i].as_ref()).collect();

    let restarts = options.n_restarts.max(1);
    let runs: Vec<Run> = (0..restarts)
        .into_par_iter()
        .map(|r| lloyd(&sorted, k, options.seed.wrapping_add(r as u64), options.max_iter))
        .collect();
    let best = runs
        .into_iter()
        .reduce(|best, run| if run.inertia < best.inertia { run } else { best })
        .expect("at least one restart");

    let mut labels = vec![0; n];
    for (pos, &orig) in order.iter().enumerate() {
        labels[orig] = best.labels[pos];
    }
    let flat: Vec<f64> = best.centroids.concat();
    Ok(KMeansModel {
        k,
        dim,
        seed: options.seed,
        centroids: DMatrix::from_row_slice(k, dim, &flat),
        inertia: best.inertia,
        iterations_run: best.iterations,
        labels,
        inertia_trace: best.trace,
    })
}

impl KMeansModel {
    pub fn centroid(&self, j: usize) -> Vec<f64> {
        self.centroids.row(j).iter().copied().collect()
    }

    /// Nearest centroid by squared Euclidean distance, lowest index on ties.
    pub fn assign(&self, segment: &[f64]) -> Result<usize> {
        if segment.len() != self.dim {
            return Err(Error::Shape(format!(
                "segment of length {} for centroids of length {}",
                segment.len(),
                self.dim
            )));
        }
        let mut best = (0, f64::INFINITY);
        for j in 0..self.k {
            let d: f64 = self
                .centroids
                .row(j)
                .iter()
                .zip(segment)
                .map(|(c, x)| (c - x) * (c - x))
                .sum();
            if d < best.1 {
                best = (j, d);
            }
        }
        Ok(best.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterPairAssignment {
    pub storm_id: String,
    pub lat_cluster: usize,
    pub lon_cluster: usize,
}

/// (latitude cluster, longitude cluster) for each window's predictor segment.
pub fn assign_pairs(
    lat_model: &KMeansModel,
    lon_model: &KMeansModel,
    windows: &[TrajectoryWindow],
) -> Result<Vec<ClusterPairAssignment>> {
    windows
        .iter()
        .map(|w| {
            Ok(ClusterPairAssignment {
                storm_id: w.storm_id.clone(),
                lat_cluster: lat_model.assign(w.predictor_lat())?,
                lon_cluster: lon_model.assign(w.predictor_lon())?,
            })
        })
        .collect()
}
