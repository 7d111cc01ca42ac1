//! Basis systems for functional observations.
//!
//! A curve is written as `x(t) = sum_k c_k phi_k(t)`. Two families are
//! provided: B-splines of arbitrary order on a clamped knot vector, and an
//! orthonormal Fourier system.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::quadrature::{gauss_legendre, mapped};
use crate::{Error, Result};

/// Slack allowed outside `[lo, hi]` before evaluation is refused.
pub const DOMAIN_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BasisKind {
    /// `order` is the polynomial degree plus one (4 = cubic).
    Bspline { order: usize, interior_knots: Vec<f64> },
    /// Constant, then alternating sine/cosine pairs of increasing frequency.
    Fourier { period: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawBasis {
    #[serde(flatten)]
    kind: BasisKind,
    dim: usize,
    domain: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBasis", into = "RawBasis")]
pub struct BasisSystem {
    kind: BasisKind,
    dim: usize,
    lo: f64,
    hi: f64,
    // Clamped knot vector (order copies of each endpoint); empty for Fourier.
    knots: Vec<f64>,
}

impl TryFrom<RawBasis> for BasisSystem {
    type Error = Error;

    fn try_from(raw: RawBasis) -> Result<Self> {
        let [lo, hi] = raw.domain;
        let basis = match raw.kind {
            BasisKind::Bspline { order, interior_knots } => BasisSystem::bspline(lo, hi, order, interior_knots)?,
            BasisKind::Fourier { period } => BasisSystem::fourier(lo, hi, raw.dim, period)?,
        };
        if basis.dim != raw.dim {
            return Err(Error::InvalidArgument(format!(
                "basis declares dimension {} but its knots imply {}",
                raw.dim, basis.dim
            )));
        }
        Ok(basis)
    }
}

impl From<BasisSystem> for RawBasis {
    fn from(b: BasisSystem) -> Self {
        RawBasis {
            kind: b.kind,
            dim: b.dim,
            domain: [b.lo, b.hi],
        }
    }
}

impl BasisSystem {
    /// B-spline basis with explicit interior knots; dimension is
    /// `interior_knots.len() + order`.
    pub fn bspline(lo: f64, hi: f64, order: usize, interior_knots: Vec<f64>) -> Result<Self> {
        check_domain(lo, hi)?;
        if order < 1 {
            return Err(Error::InvalidArgument("B-spline order must be at least 1".into()));
        }
        if interior_knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidArgument("interior knots must be non-decreasing".into()));
        }
        if interior_knots.iter().any(|&k| !(k > lo && k < hi)) {
            return Err(Error::InvalidArgument(format!(
                "interior knots must lie strictly inside ({lo}, {hi})"
            )));
        }
        let dim = interior_knots.len() + order;
        let mut knots = Vec::with_capacity(dim + order);
        knots.extend(std::iter::repeat_n(lo, order));
        knots.extend_from_slice(&interior_knots);
        knots.extend(std::iter::repeat_n(hi, order));
        Ok(Self {
            kind: BasisKind::Bspline { order, interior_knots },
            dim,
            lo,
            hi,
            knots,
        })
    }

    /// B-spline basis of dimension `dim` with uniformly spaced interior knots.
    pub fn bspline_uniform(lo: f64, hi: f64, dim: usize, order: usize) -> Result<Self> {
        if dim < order {
            return Err(Error::InvalidArgument(format!(
                "B-spline dimension {dim} is below the order {order}"
            )));
        }
        let n_interior = dim - order;
        let step = (hi - lo) / (n_interior + 1) as f64;
        let interior = (1..=n_interior).map(|i| lo + step * i as f64).collect();
        Self::bspline(lo, hi, order, interior)
    }

    pub fn fourier(lo: f64, hi: f64, dim: usize, period: f64) -> Result<Self> {
        check_domain(lo, hi)?;
        if dim < 1 {
            return Err(Error::InvalidArgument("basis dimension must be at least 1".into()));
        }
        if !period.is_finite() || period <= 0.0 {
            return Err(Error::InvalidArgument("Fourier period must be positive".into()));
        }
        Ok(Self {
            kind: BasisKind::Fourier { period },
            dim,
            lo,
            hi,
            knots: Vec::new(),
        })
    }

    pub fn kind(&self) -> &BasisKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    fn clamp_to_domain(&self, t: f64) -> Result<f64> {
        if !t.is_finite() || t < self.lo - DOMAIN_TOLERANCE || t > self.hi + DOMAIN_TOLERANCE {
            return Err(Error::Domain {
                t,
                lo: self.lo,
                hi: self.hi,
            });
        }
        Ok(t.clamp(self.lo, self.hi))
    }

    /// Values `(phi_1(t), ..., phi_K(t))`.
    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        let t = self.clamp_to_domain(t)?;
        let mut out = vec![0.0; self.dim];
        self.eval_into(t, &mut out);
        Ok(out)
    }

    // `t` must already be clamped.
    fn eval_into(&self, t: f64, out: &mut [f64]) {
        match &self.kind {
            BasisKind::Bspline { order, .. } => {
                let span = self.find_span(t);
                let values = bspline_nonzero(&self.knots, *order, span, t);
                let first = span + 1 - order;
                out[first..=span].copy_from_slice(&values);
            }
            BasisKind::Fourier { period } => {
                let phase = 2.0 * PI * (t - self.lo) / period;
                let c0 = 1.0 / period.sqrt();
                let c1 = (2.0 / period).sqrt();
                out[0] = c0;
                for (k, v) in out.iter_mut().enumerate().skip(1) {
                    let freq = k.div_ceil(2) as f64;
                    *v = if k % 2 == 1 {
                        c1 * (freq * phase).sin()
                    } else {
                        c1 * (freq * phase).cos()
                    };
                }
            }
        }
    }

    // Index mu with knots[mu] <= t < knots[mu + 1]; the last non-empty span
    // is closed on the right.
    fn find_span(&self, t: f64) -> usize {
        let order = match self.kind {
            BasisKind::Bspline { order, .. } => order,
            BasisKind::Fourier { .. } => unreachable!(),
        };
        let last = self.dim - 1;
        if t >= self.knots[last + 1] {
            return last;
        }
        // knots[order - 1] == lo <= t < knots[dim] == hi
        let (mut low, mut high) = (order - 1, last + 1);
        while high - low > 1 {
            let mid = (low + high) / 2;
            if t < self.knots[mid] {
                high = mid;
            } else {
                low = mid;
            }
        }
        low
    }

    /// `p x K` matrix whose row `j` is the basis evaluated at `grid[j]`.
    pub fn matrix(&self, grid: &[f64]) -> Result<DMatrix<f64>> {
        let mut m = DMatrix::zeros(grid.len(), self.dim);
        let mut row = vec![0.0; self.dim];
        for (j, &t) in grid.iter().enumerate() {
            let t = self.clamp_to_domain(t)?;
            row.iter_mut().for_each(|v| *v = 0.0);
            self.eval_into(t, &mut row);
            for (k, v) in row.iter().enumerate() {
                m[(j, k)] = *v;
            }
        }
        Ok(m)
    }

    /// Gram matrix `J = int phi(t) phi(t)^T dt` over the domain.
    ///
    /// B-splines are integrated span by span with an `order`-point
    /// Gauss–Legendre rule, exact for products of two degree `order - 1`
    /// polynomials. Fourier terms use 20 points on each of `2K` subintervals.
    pub fn gram(&self) -> DMatrix<f64> {
        let (breaks, points) = match &self.kind {
            BasisKind::Bspline { order, .. } => {
                let mut b = self.knots.clone();
                b.dedup();
                (b, *order)
            }
            BasisKind::Fourier { .. } => {
                let pieces = 2 * self.dim;
                let h = (self.hi - self.lo) / pieces as f64;
                let b = (0..=pieces).map(|i| self.lo + h * i as f64).collect();
                (b, 20)
            }
        };
        let (nodes, weights) = gauss_legendre(points);
        let k = self.dim;
        let mut gram = DMatrix::zeros(k, k);
        let mut phi = vec![0.0; k];
        for w in breaks.windows(2) {
            for (t, wt) in mapped(&nodes, &weights, w[0], w[1]) {
                phi.iter_mut().for_each(|v| *v = 0.0);
                self.eval_into(t, &mut phi);
                for a in 0..k {
                    if phi[a] == 0.0 {
                        continue;
                    }
                    for b in a..k {
                        gram[(a, b)] += wt * phi[a] * phi[b];
                    }
                }
            }
        }
        for a in 0..k {
            for b in 0..a {
                gram[(a, b)] = gram[(b, a)];
            }
        }
        gram
    }
}

fn check_domain(lo: f64, hi: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::InvalidArgument(format!("basis domain [{lo}, {hi}] is empty")));
    }
    Ok(())
}

/// The `order` B-splines that are non-zero on knot span `span`, built by the
/// triangular Cox–de Boor recurrence.
fn bspline_nonzero(knots: &[f64], order: usize, span: usize, t: f64) -> Vec<f64> {
    let mut values = vec![0.0; order];
    let mut left = vec![0.0; order];
    let mut right = vec![0.0; order];
    values[0] = 1.0;
    for j in 1..order {
        left[j] = t - knots[span + 1 - j];
        right[j] = knots[span + j] - t;
        let mut saved = 0.0;
        for r in 0..j {
            let denom = right[r + 1] + left[j - r];
            let temp = if denom == 0.0 { 0.0 } else { values[r] / denom };
            values[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        values[j] = saved;
    }
    values
}
