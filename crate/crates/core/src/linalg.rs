//! Symmetric positive-definite solves with an explicit rank check.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

/// Smallest admissible squared pivot of the Jacobi-scaled matrix.
pub(crate) const PIVOT_TOLERANCE: f64 = 1e-12;

/// Cholesky factor of `D A D` where `D = diag(a_ii^{-1/2})`.
///
/// Scaling first makes the pivot test independent of the units of the
/// unknowns (degrees of longitude vs. intercepts, say).
#[derive(Debug, Clone)]
pub(crate) struct SpdSolver {
    chol: Cholesky<f64, Dyn>,
    scale: DVector<f64>,
}

impl SpdSolver {
    /// Returns the smallest scaled squared pivot on failure.
    pub(crate) fn new(a: &DMatrix<f64>) -> Result<Self, f64> {
        let n = a.nrows();
        debug_assert_eq!(n, a.ncols());
        let mut scale = DVector::zeros(n);
        for i in 0..n {
            let d = a[(i, i)];
            if !d.is_finite() || d <= 0.0 {
                return Err(0.0);
            }
            scale[i] = 1.0 / d.sqrt();
        }
        let scaled = DMatrix::from_fn(n, n, |i, j| a[(i, j)] * scale[i] * scale[j]);
        let chol = Cholesky::new(scaled).ok_or(0.0)?;
        let min_pivot = chol
            .l_dirty()
            .diagonal()
            .iter()
            .map(|v| v * v)
            .fold(f64::INFINITY, f64::min);
        if min_pivot < PIVOT_TOLERANCE {
            return Err(min_pivot);
        }
        Ok(Self { chol, scale })
    }

    pub(crate) fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let scaled = b.component_mul(&self.scale);
        self.chol.solve(&scaled).component_mul(&self.scale)
    }
}
