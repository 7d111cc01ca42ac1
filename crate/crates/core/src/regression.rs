//! Function-on-function linear regression.
//!
//! The model is `y(s) = alpha(s) + int beta(s, t) x(t) dt` with
//! `alpha(s) = theta(s)^T a` and `beta(s, t) = theta(s)^T B phi(t)`, where
//! `theta` is the response basis and `phi` the predictor basis. For a
//! predictor curve with coefficients `c` the integral is exactly
//! `theta(s)^T B J c`, `J` being the predictor Gram matrix.
//!
//! `(a, B)` are fitted jointly by penalized least squares on the raw
//! response values at the response grid:
//!
//! ```text
//! sum_i sum_j (y_i(s_j) - theta(s_j)^T a - theta(s_j)^T B J c_i)^2 + ridge * |B|_F^2
//! ```

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::basis::BasisSystem;
use crate::experiment::GeoPoint;
use crate::ingest::{normalized_grid, DatasetMatrix, TrajectoryWindow};
use crate::linalg::SpdSolver;
use crate::matrix_doc::{plain_vector, row_major};
use crate::smooth::{fit_bundle, CurveBundle, FunctionalCurve, Projector};
use crate::{Error, Result};

/// Default ridge on `B`; small enough to be invisible on well-posed fits.
pub const DEFAULT_RIDGE: f64 = 1e-8;

/// How a trajectory window is laid out on the unit time axis and which
/// bases represent its two segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub total_len: usize,
    pub predictor_len: usize,
    /// Time axis convention; always `"index-affine-unit"` (index 1..L onto [0, 1]).
    pub normalization: String,
    pub predictor_dim: usize,
    pub response_dim: usize,
    pub order: usize,
    /// Ridge used when representing predictor segments as curves.
    pub fit_ridge: f64,
}

impl TrainingConfig {
    pub fn new(total_len: usize, predictor_len: usize) -> Result<Self> {
        if predictor_len == 0 || predictor_len >= total_len {
            return Err(Error::InvalidArgument(format!(
                "predictor length {predictor_len} must satisfy 0 < P < L = {total_len}"
            )));
        }
        Ok(Self {
            total_len,
            predictor_len,
            normalization: "index-affine-unit".into(),
            predictor_dim: 12,
            response_dim: 6,
            order: 4,
            fit_ridge: 0.0,
        })
    }

    pub fn predictor_grid(&self) -> Vec<f64> {
        normalized_grid(self.total_len)[..self.predictor_len].to_vec()
    }

    pub fn response_grid(&self) -> Vec<f64> {
        normalized_grid(self.total_len)[self.predictor_len..].to_vec()
    }

    pub fn predictor_basis(&self) -> Result<BasisSystem> {
        let g = self.predictor_grid();
        // A single-point predictor segment still needs a non-empty domain.
        let hi = if g.len() > 1 {
            g[g.len() - 1]
        } else {
            0.5 / (self.total_len - 1) as f64
        };
        BasisSystem::bspline_uniform(g[0], hi, self.predictor_dim, self.order)
    }

    pub fn response_basis(&self) -> Result<BasisSystem> {
        let g = self.response_grid();
        let lo = if g.len() > 1 {
            g[0]
        } else {
            1.0 - 0.5 / (self.total_len - 1) as f64
        };
        BasisSystem::bspline_uniform(lo, 1.0, self.response_dim, self.order)
    }

    /// Projector for predictor segments under this configuration.
    pub fn predictor_projector(&self) -> Result<Projector> {
        Projector::new(&self.predictor_basis()?, &self.predictor_grid(), self.fit_ridge)
    }

    pub fn check_window(&self, window: &TrajectoryWindow) -> Result<()> {
        if window.total_len() != self.total_len || window.predictor_len != self.predictor_len {
            return Err(Error::Shape(format!(
                "storm {} has (L, P) = ({}, {}), model expects ({}, {})",
                window.storm_id,
                window.total_len(),
                window.predictor_len,
                self.total_len,
                self.predictor_len
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoFModel {
    pub predictor_basis: BasisSystem,
    pub response_basis: BasisSystem,
    /// Coefficients of `alpha(s)` on the response basis.
    #[serde(with = "plain_vector")]
    pub alpha_coeffs: DVector<f64>,
    /// `K_s x K_t` coefficients of `beta(s, t)`.
    #[serde(rename = "beta_coeffs", with = "row_major")]
    pub beta: DMatrix<f64>,
    #[serde(with = "row_major")]
    pub predictor_gram: DMatrix<f64>,
    pub ridge: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training: Option<TrainingConfig>,
}

impl FoFModel {
    /// Assembles a model from explicit coefficients.
    pub fn from_parts(
        predictor_basis: BasisSystem,
        response_basis: BasisSystem,
        alpha_coeffs: DVector<f64>,
        beta: DMatrix<f64>,
    ) -> Result<Self> {
        let (ks, kt) = (response_basis.dim(), predictor_basis.dim());
        if alpha_coeffs.len() != ks || beta.shape() != (ks, kt) {
            return Err(Error::Shape(format!(
                "alpha has {} and beta is {:?}; bases need {ks} and ({ks}, {kt})",
                alpha_coeffs.len(),
                beta.shape()
            )));
        }
        Ok(Self {
            predictor_gram: predictor_basis.gram(),
            predictor_basis,
            response_basis,
            alpha_coeffs,
            beta,
            ridge: 0.0,
            training: None,
        })
    }

    pub fn with_training(mut self, training: TrainingConfig) -> Self {
        self.training = Some(training);
        self
    }

    /// Response-curve coefficients `a + B J c` for predictor coefficients `c`.
    pub fn response_coefficients(&self, predictor_coeffs: &DVector<f64>) -> Result<DVector<f64>> {
        if predictor_coeffs.len() != self.predictor_basis.dim() {
            return Err(Error::BasisMismatch(format!(
                "{} predictor coefficients for a basis of dimension {}",
                predictor_coeffs.len(),
                self.predictor_basis.dim()
            )));
        }
        let z = &self.predictor_gram * predictor_coeffs;
        Ok(&self.alpha_coeffs + &self.beta * z)
    }

    pub fn alpha(&self, grid: &[f64]) -> Result<Vec<f64>> {
        let theta = self.response_basis.matrix(grid)?;
        Ok((theta * &self.alpha_coeffs).iter().copied().collect())
    }
}

/// Normal equations `M w = r` of the joint least-squares problem, with
/// `w = vec([a B])` stacked column by column.
pub(crate) fn normal_equations(
    z: &DMatrix<f64>,
    theta: &DMatrix<f64>,
    y: &DMatrix<f64>,
    ridge: f64,
) -> (DMatrix<f64>, DVector<f64>) {
    let (kt, n) = z.shape();
    let ks = theta.ncols();
    let mut design = DMatrix::zeros(kt + 1, n);
    design.row_mut(0).fill(1.0);
    design.rows_mut(1, kt).copy_from(z);
    let g = &design * design.transpose();
    let t = theta.tr_mul(theta);
    let dim = ks * (kt + 1);
    let mut m = DMatrix::zeros(dim, dim);
    for i in 0..=kt {
        for j in 0..=kt {
            let gij = g[(i, j)];
            for r in 0..ks {
                for s in 0..ks {
                    m[(i * ks + r, j * ks + s)] = gij * t[(r, s)];
                }
            }
        }
    }
    for d in ks..dim {
        m[(d, d)] += ridge;
    }
    let rhs_mat = theta.tr_mul(y) * design.transpose();
    let rhs = DVector::from_column_slice(rhs_mat.as_slice());
    (m, rhs)
}

/// Fits `(a, B)` from predictor curves and the raw response values.
///
/// `responses` holds one column per storm on the response grid
/// (`responses.time_grid`), in the same order as `predictors`.
pub fn fit_fof(
    predictors: &CurveBundle,
    responses: &DatasetMatrix,
    response_basis: &BasisSystem,
    ridge: f64,
) -> Result<FoFModel> {
    let n = predictors.len();
    if n == 0 {
        return Err(Error::InvalidArgument("cannot fit a model to zero curves".into()));
    }
    if responses.n_storms() != n {
        return Err(Error::Shape(format!(
            "{n} predictor curves but {} response columns",
            responses.n_storms()
        )));
    }
    if !ridge.is_finite() || ridge < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "ridge must be non-negative, got {ridge}"
        )));
    }
    let gram = predictors.basis.gram();
    let z = &gram * &predictors.coefficients;
    let theta = response_basis.matrix(&responses.time_grid)?;
    let (m, rhs) = normal_equations(&z, &theta, &responses.values, ridge);
    let solver = SpdSolver::new(&m).map_err(|pivot| {
        Error::Singular(format!(
            "function-on-function design with {n} curves is singular (scaled pivot {pivot:.3e}); \
             use a positive ridge"
        ))
    })?;
    let w = solver.solve(&rhs);
    let ks = response_basis.dim();
    let kt = predictors.basis.dim();
    let wm = DMatrix::from_column_slice(ks, kt + 1, w.as_slice());
    Ok(FoFModel {
        predictor_basis: predictors.basis.clone(),
        response_basis: response_basis.clone(),
        alpha_coeffs: wm.column(0).into_owned(),
        beta: wm.columns(1, kt).into_owned(),
        predictor_gram: gram,
        ridge,
        training: None,
    })
}

/// `yhat(s_j) = theta(s_j)^T (a + B J c_x)` on `response_grid`.
pub fn predict_fof(model: &FoFModel, x: &FunctionalCurve, response_grid: &[f64]) -> Result<Vec<f64>> {
    if x.basis != model.predictor_basis {
        return Err(Error::BasisMismatch(
            "predictor curve does not use the model's predictor basis".into(),
        ));
    }
    let coeffs = model.response_coefficients(&x.coefficients)?;
    let theta = model.response_basis.matrix(response_grid)?;
    Ok((theta * coeffs).iter().copied().collect())
}

/// Fits a coordinate model on windows under `config`.
pub fn fit_coordinate_model(
    windows: &[&TrajectoryWindow],
    coordinate: Coordinate,
    config: &TrainingConfig,
    ridge: f64,
) -> Result<FoFModel> {
    let (pred, resp) = coordinate_matrices(windows, coordinate, config)?;
    let predictors = fit_bundle(
        &config.predictor_basis()?,
        &config.predictor_grid(),
        &pred,
        config.fit_ridge,
    )?;
    Ok(fit_fof(&predictors, &resp, &config.response_basis()?, ridge)?.with_training(config.clone()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coordinate {
    Lat,
    Lon,
}

impl Coordinate {
    pub fn predictor<'a>(&self, w: &'a TrajectoryWindow) -> &'a [f64] {
        match self {
            Coordinate::Lat => w.predictor_lat(),
            Coordinate::Lon => w.predictor_lon(),
        }
    }

    pub fn response<'a>(&self, w: &'a TrajectoryWindow) -> &'a [f64] {
        match self {
            Coordinate::Lat => w.response_lat(),
            Coordinate::Lon => w.response_lon(),
        }
    }
}

fn coordinate_matrices(
    windows: &[&TrajectoryWindow],
    coordinate: Coordinate,
    config: &TrainingConfig,
) -> Result<(DatasetMatrix, DatasetMatrix)> {
    for w in windows {
        config.check_window(w)?;
    }
    let n = windows.len();
    let p = config.predictor_len;
    let q = config.total_len - p;
    let ids: Vec<String> = windows.iter().map(|w| w.storm_id.clone()).collect();
    let pred = DMatrix::from_fn(p, n, |j, i| coordinate.predictor(windows[i])[j]);
    let resp = DMatrix::from_fn(q, n, |j, i| coordinate.response(windows[i])[j]);
    Ok((
        DatasetMatrix::new(pred, config.predictor_grid(), ids.clone())?,
        DatasetMatrix::new(resp, config.response_grid(), ids)?,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryForecast {
    pub storm_id: String,
    pub points: Vec<GeoPoint>,
}

/// Forecasts the response segment of `window` from its predictor segment.
pub fn predict_trajectory(
    lat_model: &FoFModel,
    lon_model: &FoFModel,
    window: &TrajectoryWindow,
    fit_ridge: f64,
) -> Result<TrajectoryForecast> {
    let total = window.total_len();
    let grid = normalized_grid(total);
    let (pred_grid, resp_grid) = grid.split_at(window.predictor_len);
    for model in [lat_model, lon_model] {
        if let Some(cfg) = &model.training {
            cfg.check_window(window)?;
        }
    }
    let lat_curve = Projector::new(&lat_model.predictor_basis, pred_grid, fit_ridge)?.fit(window.predictor_lat())?;
    let lon_curve = Projector::new(&lon_model.predictor_basis, pred_grid, fit_ridge)?.fit(window.predictor_lon())?;
    let lat = predict_fof(lat_model, &lat_curve, resp_grid)?;
    let lon = predict_fof(lon_model, &lon_curve, resp_grid)?;
    Ok(TrajectoryForecast {
        storm_id: window.storm_id.clone(),
        points: lat
            .into_iter()
            .zip(lon)
            .map(|(lat, lon)| GeoPoint { lat, lon })
            .collect(),
    })
}
