use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative symmetry tolerance applied on construction.
pub const SYM_REL_TOL: f64 = 1e-12;

/// A dense real symmetric matrix.
///
/// The stored matrix is exactly symmetric: inputs within tolerance are
/// replaced by their symmetric part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SymMat(DMatrix<f64>);

impl SymMat {
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), actual: m.ncols() });
        }
        if m.nrows() == 0 {
            return Err(Error::Argument("matrix must have positive dimension".into()));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("matrix entries must be finite".into()));
        }
        let scale = m.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
        let asymmetry = (&m - m.transpose()).iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if asymmetry > SYM_REL_TOL * scale {
            return Err(Error::NotSymmetric { asymmetry });
        }
        let sym = (&m + m.transpose()) * 0.5;
        Ok(Self(sym))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, actual: row.len() });
            }
        }
        Self::from_matrix(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn diag(entries: &[f64]) -> Self {
        assert!(!entries.is_empty(), "diagonal must be nonempty");
        Self(DMatrix::from_diagonal(&DVector::from_column_slice(entries)))
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0);
        Self(DMatrix::zeros(dim, dim))
    }

    /// `Q diag(levels) Q^T` for an orthogonal `Q`.
    pub fn from_spectrum(basis: &DMatrix<f64>, levels: &[f64]) -> Result<Self> {
        if basis.ncols() != levels.len() {
            return Err(Error::DimensionMismatch { expected: basis.ncols(), actual: levels.len() });
        }
        let d = DMatrix::from_diagonal(&DVector::from_column_slice(levels));
        let m = basis * d * basis.transpose();
        Ok(Self((&m + m.transpose()) * 0.5))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.0.norm()
    }

    /// `self + eps * other`.
    pub fn add_scaled(&self, eps: f64, other: &SymMat) -> Result<SymMat> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: other.dim() });
        }
        Ok(SymMat(&self.0 + &other.0 * eps))
    }

    /// Eigenvalues and orthonormal eigenvectors (as columns), unsorted.
    pub fn eigen(&self) -> (DVector<f64>, DMatrix<f64>) {
        let eig = SymmetricEigen::new(self.0.clone());
        (eig.eigenvalues, eig.eigenvectors)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.0.row_iter().map(|r| r.iter().copied().collect()).collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for SymMat {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl From<SymMat> for Vec<Vec<f64>> {
    fn from(m: SymMat) -> Self {
        m.to_rows()
    }
}

/// Frobenius norm of `AB - BA`.
pub fn commutator_norm(a: &SymMat, b: &SymMat) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), actual: b.dim() });
    }
    let ab = a.matrix() * b.matrix();
    let ba = b.matrix() * a.matrix();
    Ok((ab - ba).norm())
}
