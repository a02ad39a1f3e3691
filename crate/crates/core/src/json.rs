//! Row-major nested-array encoding of matrices for JSON interchange.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::foundation::{ComplexMatrix, RealMatrix, RealVector};

pub fn rows_of(m: &RealMatrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn complex_rows_of(m: &ComplexMatrix) -> Vec<Vec<Complex64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Builds a matrix from nested rows. An empty outer list gives a 0x0 matrix.
pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<RealMatrix> {
    let ncols = rows.first().map_or(0, Vec::len);
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(Error::Dimension(format!(
            "row {i} has {} entries, expected {ncols}",
            r.len()
        )));
    }
    if let Some(x) = rows.iter().flatten().find(|x| !x.is_finite()) {
        return Err(Error::Parameter(format!("non-finite matrix entry {x}")));
    }
    Ok(RealMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

pub fn complex_matrix_from_rows(rows: &[Vec<Complex64>]) -> Result<ComplexMatrix> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Dimension("ragged complex matrix rows".into()));
    }
    Ok(ComplexMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

/// `#[serde(with = "crate::json::real")]`
pub mod real {
    use super::*;

    pub fn serialize<S: Serializer>(m: &RealMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        rows_of(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<RealMatrix, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        matrix_from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "crate::json::complex")]`; entries are `[re, im]` pairs.
pub mod complex {
    use super::*;

    pub fn serialize<S: Serializer>(m: &ComplexMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        complex_rows_of(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<ComplexMatrix, D::Error> {
        let rows = Vec::<Vec<Complex64>>::deserialize(d)?;
        complex_matrix_from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "crate::json::vector")]`
pub mod vector {
    use super::*;

    pub fn serialize<S: Serializer>(v: &RealVector, s: S) -> std::result::Result<S::Ok, S::Error> {
        v.as_slice().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<RealVector, D::Error> {
        Ok(RealVector::from_vec(Vec::<f64>::deserialize(d)?))
    }
}

/// Formats a float with 17 significant digits (lossless for `f64`).
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn ragged_rows_rejected() {
        assert!(matrix_from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn row_major_layout() {
        let m = matrix_from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(m, dmatrix![1.0, 2.0; 3.0, 4.0]);
        assert_eq!(rows_of(&m), vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
    }

    #[test]
    fn fmt17_round_trips() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 12345.678] {
            assert_eq!(fmt17(x).parse::<f64>().unwrap(), x);
        }
    }
}
