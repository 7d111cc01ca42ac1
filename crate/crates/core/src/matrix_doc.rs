//! Row-major JSON encoding for dense matrices.
//!
//! Matrices are written as `{"rows": r, "cols": c, "data": [...]}` with
//! `data` in row-major order, independent of nalgebra's column-major storage.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDoc {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl From<&DMatrix<f64>> for MatrixDoc {
    fn from(m: &DMatrix<f64>) -> Self {
        let mut data = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            data.extend(m.row(i).iter().copied());
        }
        MatrixDoc {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }
}

impl TryFrom<MatrixDoc> for DMatrix<f64> {
    type Error = String;

    fn try_from(doc: MatrixDoc) -> Result<Self, Self::Error> {
        if doc.rows * doc.cols != doc.data.len() {
            return Err(format!(
                "matrix declares {}x{} but holds {} values",
                doc.rows,
                doc.cols,
                doc.data.len()
            ));
        }
        Ok(DMatrix::from_row_slice(doc.rows, doc.cols, &doc.data))
    }
}

/// `#[serde(with = "row_major")]` adapter for `DMatrix<f64>` fields.
pub mod row_major {
    use super::*;

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        MatrixDoc::from(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
        let doc = MatrixDoc::deserialize(d)?;
        DMatrix::try_from(doc).map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "plain_vector")]` adapter writing a `DVector<f64>` as a JSON array.
pub mod plain_vector {
    use super::*;

    pub fn serialize<S: Serializer>(v: &DVector<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.as_slice().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DVector<f64>, D::Error> {
        Ok(DVector::from_vec(Vec::<f64>::deserialize(d)?))
    }
}
