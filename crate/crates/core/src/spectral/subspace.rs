use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

use super::symmat::SymMat;

/// Orthonormality tolerance for explicitly supplied bases.
pub const ORTHO_TOL: f64 = 1e-10;

/// A linear subspace of `R^n` held by an orthonormal basis.
///
/// Bases are not unique, so equality is decided through projectors
/// (see [`Subspace::distance`]).
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Vec<DVector<f64>>,
}

impl Subspace {
    pub fn new(ambient_dim: usize, basis: Vec<DVector<f64>>) -> Result<Self> {
        for v in &basis {
            if v.len() != ambient_dim {
                return Err(Error::DimensionMismatch { expected: ambient_dim, actual: v.len() });
            }
        }
        for (i, u) in basis.iter().enumerate() {
            for (j, v) in basis.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                if (u.dot(v) - target).abs() > ORTHO_TOL {
                    return Err(Error::Argument(format!("basis vectors {i} and {j} are not orthonormal")));
                }
            }
        }
        Ok(Self { ambient_dim, basis })
    }

    pub fn zero(ambient_dim: usize) -> Self {
        Self { ambient_dim, basis: Vec::new() }
    }

    pub fn full(ambient_dim: usize) -> Self {
        let basis = (0..ambient_dim).map(|i| unit(ambient_dim, i)).collect();
        Self { ambient_dim, basis }
    }

    /// Canonical basis of the span of orthonormal columns.
    ///
    /// The result depends only on the subspace: it is built by pivoted
    /// Gram-Schmidt on `P e_0, P e_1, ...` where `P` is the orthogonal
    /// projector, preferring the lowest coordinate index among near-ties.
    pub(crate) fn canonical_from_columns(ambient_dim: usize, cols: &[DVector<f64>]) -> Self {
        let rank = cols.len();
        if rank == 0 {
            return Self::zero(ambient_dim);
        }
        if rank == ambient_dim {
            return Self::full(ambient_dim);
        }
        let mut p = DMatrix::zeros(ambient_dim, ambient_dim);
        for c in cols {
            p += c * c.transpose();
        }
        let mut residuals: Vec<DVector<f64>> = (0..ambient_dim).map(|i| p.column(i).into_owned()).collect();
        let mut used = vec![false; ambient_dim];
        let mut basis = Vec::with_capacity(rank);
        for _ in 0..rank {
            let best = residuals
                .iter()
                .enumerate()
                .filter(|(i, _)| !used[*i])
                .fold(0.0f64, |m, (_, r)| m.max(r.norm()));
            let pick = (0..ambient_dim)
                .find(|&i| !used[i] && residuals[i].norm() >= best * (1.0 - 1e-9))
                .expect("rank exceeds available pivots");
            used[pick] = true;
            let q = &residuals[pick] / residuals[pick].norm();
            for (i, r) in residuals.iter_mut().enumerate() {
                if !used[i] {
                    let c = q.dot(r);
                    *r -= &q * c;
                }
            }
            basis.push(q);
        }
        Self { ambient_dim, basis }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self) -> &[DVector<f64>] {
        &self.basis
    }

    /// Basis vectors as columns of an `n x k` matrix.
    pub fn basis_matrix(&self) -> DMatrix<f64> {
        if self.basis.is_empty() {
            DMatrix::zeros(self.ambient_dim, 0)
        } else {
            DMatrix::from_columns(&self.basis)
        }
    }

    pub fn projector(&self) -> DMatrix<f64> {
        let b = self.basis_matrix();
        &b * b.transpose()
    }

    /// Spectral norm of the difference of orthogonal projectors.
    ///
    /// This is `sin` of the largest principal angle when dimensions agree and
    /// `1` when they differ.
    pub fn distance(&self, other: &Subspace) -> Result<f64> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim, actual: other.ambient_dim });
        }
        let diff = self.projector() - other.projector();
        let eig = SymmetricEigen::new(diff);
        Ok(eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs())))
    }

    pub fn same_as(&self, other: &Subspace, tol: f64) -> Result<bool> {
        Ok(self.dim() == other.dim() && self.distance(other)? <= tol)
    }

    /// Distance from `v` to the subspace.
    pub fn residual(&self, v: &DVector<f64>) -> f64 {
        let mut r = v.clone();
        for b in &self.basis {
            let c = b.dot(&r);
            r -= b * c;
        }
        r.norm()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.basis.iter().map(|v| v.iter().copied().collect()).collect()
    }
}

impl Serialize for Subspace {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

pub(crate) fn unit(n: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(n);
    v[i] = 1.0;
    v
}

/// Span of the eigenvectors of `a` whose eigenvalue satisfies `|lambda| <= tol`.
pub fn kernel(a: &SymMat, tol: f64) -> Subspace {
    let n = a.dim();
    let (values, vectors) = a.eigen();
    let cols: Vec<DVector<f64>> = (0..n)
        .filter(|&i| values[i].abs() <= tol)
        .map(|i| vectors.column(i).into_owned())
        .collect();
    Subspace::canonical_from_columns(n, &cols)
}

/// Intersection of two subspaces via principal angles.
///
/// The dimension is the number of principal cosines `>= 1 - tol`.
pub fn subspace_intersection(u: &Subspace, v: &Subspace, tol: f64) -> Result<Subspace> {
    if u.ambient_dim != v.ambient_dim {
        return Err(Error::DimensionMismatch { expected: u.ambient_dim, actual: v.ambient_dim });
    }
    let n = u.ambient_dim;
    if u.is_zero() || v.is_zero() {
        return Ok(Subspace::zero(n));
    }
    let ub = u.basis_matrix();
    let vb = v.basis_matrix();
    let cross = ub.transpose() * &vb;
    // eigenvalues of U^T P_V U are the squared principal cosines
    let gram = &cross * cross.transpose();
    let eig = nalgebra::SymmetricEigen::new(0.5 * (&gram + gram.transpose()));
    let cut = (1.0 - tol) * (1.0 - tol);
    let cols: Vec<DVector<f64>> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] >= cut)
        .map(|i| {
            let w = &ub * eig.eigenvectors.column(i);
            let norm = w.norm();
            w / norm
        })
        .collect();
    // Re-orthonormalize before canonicalizing: nearly parallel cosines can
    // leave tiny cross terms.
    let mut ortho: Vec<DVector<f64>> = Vec::with_capacity(cols.len());
    for mut c in cols {
        for q in &ortho {
            let d = q.dot(&c);
            c -= q * d;
        }
        let norm = c.norm();
        if norm > 0.5 {
            ortho.push(c / norm);
        }
    }
    Ok(Subspace::canonical_from_columns(n, &ortho))
}
