use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};

use super::symmat::{commutator_norm, SymMat};

/// Default relative commutation tolerance.
pub const COMM_REL_TOL: f64 = 1e-10;

/// Symmetric matrices of equal dimension that commute pairwise within `comm_tol`.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutingFamily {
    members: Vec<SymMat>,
    comm_tol: f64,
}

impl CommutingFamily {
    /// Builds a family with the default tolerance `1e-10 * max(1, max ||A_k||_F)^2`.
    pub fn new(members: Vec<SymMat>) -> Result<Self> {
        let scale = members.iter().fold(1.0f64, |m, a| m.max(a.frobenius()));
        Self::with_tol(members, COMM_REL_TOL * scale * scale)
    }

    pub fn with_tol(members: Vec<SymMat>, comm_tol: f64) -> Result<Self> {
        let Some(first) = members.first() else {
            return Err(Error::Argument("a commuting family needs at least one member".into()));
        };
        let dim = first.dim();
        for m in &members {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, actual: m.dim() });
            }
        }
        for i in 0..members.len() {
            for j in (i + 1)..members.len() {
                let norm = commutator_norm(&members[i], &members[j])?;
                if norm > comm_tol {
                    return Err(Error::CommutationViolation { i, j, norm, tol: comm_tol });
                }
            }
        }
        Ok(Self { members, comm_tol })
    }

    pub fn members(&self) -> &[SymMat] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }

    pub fn comm_tol(&self) -> f64 {
        self.comm_tol
    }

    /// Largest absolute entry over all members.
    pub fn scale(&self) -> f64 {
        self.members.iter().fold(0.0f64, |m, a| m.max(a.max_abs()))
    }
}

/// Orthonormal joint eigenbasis and the eigenvalue table of a commuting family.
///
/// `levels[k][i]` is the eigenvalue of member `k` on column `i` of `basis`.
#[derive(Debug, Clone, Serialize)]
pub struct JointSpectrum {
    #[serde(serialize_with = "serialize_columns")]
    pub basis: DMatrix<f64>,
    pub levels: Vec<Vec<f64>>,
}

fn serialize_columns<S: serde::Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let cols: Vec<Vec<f64>> = m.column_iter().map(|c| c.iter().copied().collect()).collect();
    cols.serialize(s)
}

impl JointSpectrum {
    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn column(&self, i: usize) -> DVector<f64> {
        self.basis.column(i).into_owned()
    }

    /// The level tuple of column `i` across all members.
    pub fn tuple(&self, i: usize) -> Vec<f64> {
        self.levels.iter().map(|row| row[i]).collect()
    }

    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.dim();
        (self.basis.transpose() * &self.basis - DMatrix::identity(n, n)).norm()
    }

    /// Largest `||A_k - Q diag(E[k]) Q^T||_F` over the members.
    pub fn reconstruction_residual(&self, fam: &CommutingFamily) -> f64 {
        fam.members()
            .iter()
            .zip(&self.levels)
            .map(|(a, row)| {
                let d = DMatrix::from_diagonal(&DVector::from_column_slice(row));
                (a.matrix() - &self.basis * d * self.basis.transpose()).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Seed of the fixed coefficient stream used for the generic combination.
const COMBINATION_SEED: u64 = 0x6a09_e667_f3bc_c908;

/// Simultaneously diagonalizes a commuting family.
///
/// A generic combination of the (scale-normalized) members is diagonalized
/// first; every cluster of repeated eigenvalues is then split by each member
/// in turn, restricted to the cluster. The result is certified by the
/// reconstruction residual, which must not exceed `tol`.
///
/// Columns are sorted by their level tuples in descending lexicographic order
/// (levels equal within a small relative tolerance count as ties), and each
/// column is signed so that its largest-magnitude entry is positive.
pub fn joint_diagonalize(fam: &CommutingFamily, tol: f64) -> Result<JointSpectrum> {
    let n = fam.dim();
    let normalized: Vec<DMatrix<f64>> = fam
        .members()
        .iter()
        .map(|a| {
            let s = a.max_abs();
            if s > 0.0 { a.matrix() / s } else { a.matrix().clone() }
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(COMBINATION_SEED);
    let mut coeffs: Vec<f64> = (0..normalized.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
    let cnorm = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
    coeffs.iter_mut().for_each(|c| *c /= cnorm);
    let combination = normalized
        .iter()
        .zip(&coeffs)
        .fold(DMatrix::zeros(n, n), |acc, (m, c)| acc + m * *c);

    // stage 0 is the combination, stage k > 0 is member k - 1
    let stages: Vec<&DMatrix<f64>> = std::iter::once(&combination).chain(normalized.iter()).collect();
    let mut columns = Vec::with_capacity(n);
    refine(DMatrix::identity(n, n), &stages, 0, &mut columns);
    if columns.len() != n {
        return Err(Error::ConvergenceFailure { residual: f64::INFINITY, tol });
    }

    for c in columns.iter_mut() {
        canonical_sign(c);
    }
    let basis = DMatrix::from_columns(&columns);
    let levels: Vec<Vec<f64>> = fam
        .members()
        .iter()
        .map(|a| columns.iter().map(|q| q.dot(&(a.matrix() * q))).collect())
        .collect();

    let mut spectrum = JointSpectrum { basis, levels };
    sort_columns(&mut spectrum);

    let residual = spectrum.reconstruction_residual(fam).max(spectrum.orthonormality_defect());
    if !(residual <= tol) {
        return Err(Error::ConvergenceFailure { residual, tol });
    }
    Ok(spectrum)
}

fn refine(block: DMatrix<f64>, stages: &[&DMatrix<f64>], stage: usize, out: &mut Vec<DVector<f64>>) {
    let k = block.ncols();
    if k == 1 || stage >= stages.len() {
        out.extend(block.column_iter().map(|c| c.into_owned()));
        return;
    }
    let restricted = {
        let r = block.transpose() * stages[stage] * &block;
        (&r + r.transpose()) * 0.5
    };
    let eig = restricted.symmetric_eigen();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let scale = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let gap = 1e-9 * scale.max(1e-300);

    let mut start = 0;
    while start < k {
        let mut end = start + 1;
        while end < k && eig.eigenvalues[order[end - 1]] - eig.eigenvalues[order[end]] <= gap {
            end += 1;
        }
        let cols: Vec<DVector<f64>> = order[start..end]
            .iter()
            .map(|&i| &block * eig.eigenvectors.column(i))
            .collect();
        let sub = DMatrix::from_columns(&cols);
        if end - start == 1 {
            out.push(sub.column(0).into_owned());
        } else {
            refine(sub, stages, stage + 1, out);
        }
        start = end;
    }
}

pub(crate) fn canonical_sign(v: &mut DVector<f64>) {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(lead) = v.iter().copied().find(|x| x.abs() >= max * (1.0 - 1e-9)) {
        if lead < 0.0 {
            v.neg_mut();
        }
    }
}

/// Ranks values in descending order, merging values within a relative gap.
fn descending_ranks(values: &[f64]) -> Vec<usize> {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let gap = 1e-9 * scale;
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut ranks = vec![0; values.len()];
    let mut rank = 0;
    for w in 0..order.len() {
        if w > 0 && values[order[w - 1]] - values[order[w]] > gap {
            rank += 1;
        }
        ranks[order[w]] = rank;
    }
    ranks
}

fn sort_columns(spec: &mut JointSpectrum) {
    let n = spec.dim();
    let ranks: Vec<Vec<usize>> = spec.levels.iter().map(|row| descending_ranks(row)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let ka = ranks.iter().map(|r| r[a]);
        let kb = ranks.iter().map(|r| r[b]);
        ka.cmp(kb)
    });
    let cols: Vec<DVector<f64>> = order.iter().map(|&i| spec.basis.column(i).into_owned()).collect();
    spec.basis = DMatrix::from_columns(&cols);
    for row in spec.levels.iter_mut() {
        *row = order.iter().map(|&i| row[i]).collect();
    }
}
