//! Least-squares representation of discrete series as basis curves.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::BasisSystem;
use crate::ingest::DatasetMatrix;
use crate::linalg::SpdSolver;
use crate::matrix_doc::{plain_vector, row_major};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalCurve {
    pub basis: BasisSystem,
    #[serde(with = "plain_vector")]
    pub coefficients: DVector<f64>,
}

impl FunctionalCurve {
    pub fn new(basis: BasisSystem, coefficients: DVector<f64>) -> Result<Self> {
        if coefficients.len() != basis.dim() {
            return Err(Error::Shape(format!(
                "{} coefficients for a basis of dimension {}",
                coefficients.len(),
                basis.dim()
            )));
        }
        Ok(Self { basis, coefficients })
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        let phi = self.basis.eval(t)?;
        Ok(phi.iter().zip(self.coefficients.iter()).map(|(p, c)| p * c).sum())
    }

    pub fn eval_grid(&self, grid: &[f64]) -> Result<Vec<f64>> {
        let phi = self.basis.matrix(grid)?;
        Ok((phi * &self.coefficients).iter().copied().collect())
    }
}

/// Many curves sharing one basis; column `i` of `coefficients` belongs to `ids[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveBundle {
    pub basis: BasisSystem,
    #[serde(with = "row_major")]
    pub coefficients: DMatrix<f64>,
    pub ids: Vec<String>,
}

impl CurveBundle {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn curve(&self, i: usize) -> FunctionalCurve {
        FunctionalCurve {
            basis: self.basis.clone(),
            coefficients: self.coefficients.column(i).into_owned(),
        }
    }
}

/// Factorized normal equations `(Phi^T Phi + lambda I) c = Phi^T x` for a
/// fixed basis and grid, reusable across any number of series.
#[derive(Debug, Clone)]
pub struct Projector {
    basis: BasisSystem,
    phi: DMatrix<f64>,
    solver: SpdSolver,
}

impl Projector {
    pub fn new(basis: &BasisSystem, grid: &[f64], ridge: f64) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::InvalidArgument("cannot fit a curve to an empty grid".into()));
        }
        if !ridge.is_finite() || ridge < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "ridge must be non-negative, got {ridge}"
            )));
        }
        let phi = basis.matrix(grid)?;
        let mut normal = phi.tr_mul(&phi);
        for k in 0..normal.nrows() {
            normal[(k, k)] += ridge;
        }
        let solver = SpdSolver::new(&normal).map_err(|pivot| {
            Error::Singular(format!(
                "basis of dimension {} is rank-deficient on {} grid points (scaled pivot {pivot:.3e}); \
                 use a positive ridge or a smaller basis",
                basis.dim(),
                grid.len()
            ))
        })?;
        Ok(Self {
            basis: basis.clone(),
            phi,
            solver,
        })
    }

    pub fn basis_matrix(&self) -> &DMatrix<f64> {
        &self.phi
    }

    pub fn fit(&self, observations: &[f64]) -> Result<FunctionalCurve> {
        if observations.len() != self.phi.nrows() {
            return Err(Error::Shape(format!(
                "{} observations on a grid of {} points",
                observations.len(),
                self.phi.nrows()
            )));
        }
        let x = DVector::from_column_slice(observations);
        let rhs = self.phi.tr_mul(&x);
        Ok(FunctionalCurve {
            basis: self.basis.clone(),
            coefficients: self.solver.solve(&rhs),
        })
    }
}

/// Least-squares coefficients of one series on `basis`.
pub fn fit_coefficients(
    basis: &BasisSystem,
    grid: &[f64],
    observations: &[f64],
    ridge: f64,
) -> Result<FunctionalCurve> {
    Projector::new(basis, grid, ridge)?.fit(observations)
}

/// Column-wise [`fit_coefficients`] over a `p x n` matrix with one factorization.
///
/// Columns are solved independently, so the result does not depend on how
/// rayon schedules them.
pub fn fit_bundle(basis: &BasisSystem, grid: &[f64], matrix: &DatasetMatrix, ridge: f64) -> Result<CurveBundle> {
    let projector = Projector::new(basis, grid, ridge)?;
    let n = matrix.values.ncols();
    let columns: Vec<DVector<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let col: Vec<f64> = matrix.values.column(i).iter().copied().collect();
            projector.fit(&col).map(|c| c.coefficients)
        })
        .collect::<Result<_>>()?;
    let coefficients = if columns.is_empty() {
        DMatrix::zeros(basis.dim(), 0)
    } else {
        DMatrix::from_columns(&columns)
    };
    Ok(CurveBundle {
        basis: basis.clone(),
        coefficients,
        ids: matrix.storm_ids.clone(),
    })
}
