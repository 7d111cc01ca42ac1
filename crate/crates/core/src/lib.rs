//! Functional data analysis for tropical-cyclone track forecasting.
//!
//! The pipeline turns best-track records into fixed-length trajectory
//! windows, represents the latitude and longitude segments as B-spline
//! curves, and predicts the final segment of each track with a
//! function-on-function linear model. An optional functional k-means stage
//! groups storms by the shape of their predictor segment and trains one
//! model per (latitude cluster, longitude cluster) pair.
//!
//! Modules:
//! - [`ingest`]: RSMC best-track and CSV parsing, windowing, data matrices.
//! - [`basis`] and [`smooth`]: basis systems, Gram matrices, least-squares curves.
//! - [`regression`]: function-on-function model fitting and prediction.
//! - [`clustering`]: k-means over discretized predictor segments.
//! - [`experiment`]: haversine metric, global/clustered evaluation, grid search.

pub mod basis;
pub mod clustering;
pub mod error;
pub mod experiment;
pub mod ingest;
mod linalg;
pub mod matrix_doc;
mod quadrature;
pub mod regression;
pub mod smooth;

pub use error::{Error, Result};
