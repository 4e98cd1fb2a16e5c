use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

use super::family::{joint_diagonalize, CommutingFamily, JointSpectrum};
use super::subspace::{kernel, subspace_intersection, Subspace};
use super::symmat::SymMat;

/// Tolerance on the projector distance when two kernels are compared.
///
/// Kernels of `alpha + eps * beta` sit next to eigenvalues as small as
/// `1e-9 * |a_i|` when `eps` approaches the threshold, so eigenvector
/// perturbation bounds only guarantee agreement to about `1e-5`. Distinct
/// kernels of equal dimension are always far apart.
pub const SUBSPACE_MATCH_TOL: f64 = 1e-4;

/// Principal-cosine tolerance used when intersecting kernels.
pub const INTERSECTION_TOL: f64 = 1e-9;

/// A positive threshold, possibly `+inf`.
///
/// Serialized as a JSON number, or the string `"inf"` when infinite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Threshold(f64);

impl Threshold {
    pub const INFINITE: Threshold = Threshold(f64::INFINITY);

    pub fn new(value: f64) -> Self {
        assert!(value > 0.0, "threshold must be positive, got {value}");
        Self(value)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// `Some(delta)` when finite.
    pub fn finite(self) -> Option<f64> {
        self.0.is_finite().then_some(self.0)
    }

    pub fn min(self, other: Threshold) -> Threshold {
        if other.0 < self.0 { other } else { self }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() { f.write_str("inf") } else { write!(f, "{}", self.0) }
    }
}

impl Serialize for Threshold {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() { s.serialize_str("inf") } else { s.serialize_f64(self.0) }
    }
}

impl<'de> Deserialize<'de> for Threshold {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) if v > 0.0 => Ok(Threshold(v)),
            Raw::Str(s) if s == "inf" => Ok(Threshold::INFINITE),
            _ => Err(serde::de::Error::custom("threshold must be a positive number or \"inf\"")),
        }
    }
}

/// Default zero test for eigenvalues: `1e-12 * max|entry|` over the given matrices.
pub fn default_kernel_tol(mats: &[&SymMat]) -> f64 {
    let scale = mats.iter().fold(0.0f64, |m, a| m.max(a.max_abs()));
    1e-12 * scale
}

fn recon_tol(fam: &CommutingFamily) -> f64 {
    1e-9 * fam.scale().max(1.0) * (fam.dim() as f64)
}

fn pair_spectrum(alpha: &SymMat, beta: &SymMat) -> Result<(CommutingFamily, JointSpectrum)> {
    let fam = CommutingFamily::new(vec![alpha.clone(), beta.clone()])?;
    let js = joint_diagonalize(&fam, recon_tol(&fam))?;
    Ok((fam, js))
}

/// Largest `delta` with `Ker(alpha + eps beta) = Ker alpha ∩ Ker beta` for every `eps in (0, delta)`,
/// in the form `min |a_i| / |b_i|` over joint eigenvectors where both levels are nonzero.
///
/// `tol` decides which levels count as nonzero. Returns `+inf` if no joint
/// eigenvector has both levels nonzero.
pub fn delta_threshold(alpha: &SymMat, beta: &SymMat, tol: f64) -> Result<Threshold> {
    let (_, js) = pair_spectrum(alpha, beta)?;
    Ok(pair_delta(&js.levels[0], &js.levels[1], tol).0)
}

/// The threshold and the indices attaining it.
fn pair_delta(a: &[f64], b: &[f64], tol: f64) -> (Threshold, Vec<usize>) {
    let ratios: Vec<(usize, f64)> = a
        .iter()
        .zip(b)
        .enumerate()
        .filter(|(_, (x, y))| x.abs() > tol && y.abs() > tol)
        .map(|(i, (x, y))| (i, x.abs() / y.abs()))
        .collect();
    let Some(min) = ratios.iter().map(|r| r.1).reduce(f64::min) else {
        return (Threshold::INFINITE, Vec::new());
    };
    let argmin = ratios.iter().filter(|r| r.1 <= min * (1.0 + 1e-12)).map(|r| r.0).collect();
    (Threshold::new(min), argmin)
}

/// Whether the kernel jumps at `eps = delta`: true iff some minimizing index
/// has levels of opposite sign.
pub fn kernel_jumps_at_threshold(alpha: &SymMat, beta: &SymMat, tol: f64) -> Result<Option<(Threshold, bool)>> {
    let (_, js) = pair_spectrum(alpha, beta)?;
    let (delta, argmin) = pair_delta(&js.levels[0], &js.levels[1], tol);
    if delta.is_infinite() {
        return Ok(None);
    }
    let opposite = argmin.iter().any(|&i| js.levels[0][i] * js.levels[1][i] < 0.0);
    Ok(Some((delta, opposite)))
}

/// Outcome of comparing `Ker(alpha + eps beta)` with `Ker alpha ∩ Ker beta`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelReport {
    pub holds: bool,
    /// `dim Ker(alpha + eps beta)`.
    pub perturbed_dim: usize,
    /// `dim (Ker alpha ∩ Ker beta)`.
    pub joint_dim: usize,
    /// Dimension of the intersection of the two kernels above.
    pub common_dim: usize,
    pub projector_distance: f64,
}

impl KernelReport {
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.perturbed_dim, self.joint_dim, self.common_dim)
    }
}

pub fn perturbed_kernel_equality(alpha: &SymMat, beta: &SymMat, eps: f64, tol: f64) -> Result<KernelReport> {
    CommutingFamily::new(vec![alpha.clone(), beta.clone()])?;
    if !(eps > 0.0) {
        return Err(Error::NonPositiveEpsilon(eps));
    }
    let perturbed = kernel(&alpha.add_scaled(eps, beta)?, tol);
    let joint = subspace_intersection(&kernel(alpha, tol), &kernel(beta, tol), INTERSECTION_TOL)?;
    let common = subspace_intersection(&perturbed, &joint, INTERSECTION_TOL)?;
    let projector_distance = perturbed.distance(&joint)?;
    let holds = perturbed.dim() == joint.dim()
        && common.dim() == joint.dim()
        && projector_distance <= SUBSPACE_MATCH_TOL;
    Ok(KernelReport {
        holds,
        perturbed_dim: perturbed.dim(),
        joint_dim: joint.dim(),
        common_dim: common.dim(),
        projector_distance,
    })
}

/// Joint kernel `∩_k Ker A_k` of a family.
pub fn joint_kernel(fam: &CommutingFamily, tol: f64) -> Result<Subspace> {
    let mut acc = Subspace::full(fam.dim());
    for a in fam.members() {
        acc = subspace_intersection(&acc, &kernel(a, tol), INTERSECTION_TOL)?;
    }
    Ok(acc)
}

/// A uniform `delta` such that `Ker(A_1 + sum_k eps_k A_k) = ∩_k Ker A_k`
/// for all `eps_2, ..., eps_n` in `(0, delta)`.
///
/// Works on the joint spectrum: a joint eigenvector with leading level
/// `a_1 != 0` is kept out of the kernel as long as
/// `sum_k eps_k |a_k| < |a_1|`, giving the bound `|a_1| / sum_{k>1} |a_k|`.
/// A joint eigenvector with `a_1 = 0` imposes no bound when its nonzero
/// trailing levels share one sign; if they have mixed signs the combination
/// vanishes for some `eps` in every box and no uniform threshold exists.
/// Returns `+inf` for a single member.
pub fn chain_threshold(fam: &CommutingFamily) -> Result<Threshold> {
    if fam.len() == 1 {
        return Ok(Threshold::INFINITE);
    }
    let js = joint_diagonalize(fam, recon_tol(fam))?;
    let tols: Vec<f64> = fam.members().iter().map(|a| default_kernel_tol(&[a])).collect();
    let mut delta = Threshold::INFINITE;
    for i in 0..fam.dim() {
        let tuple = js.tuple(i);
        let nonzero = |k: usize| tuple[k].abs() > tols[k];
        if nonzero(0) {
            let rest: f64 = (1..tuple.len()).filter(|&k| nonzero(k)).map(|k| tuple[k].abs()).sum();
            if rest > 0.0 {
                delta = delta.min(Threshold::new(tuple[0].abs() / rest));
            }
        } else {
            let signs: Vec<bool> = (1..tuple.len()).filter(|&k| nonzero(k)).map(|k| tuple[k] > 0.0).collect();
            if signs.windows(2).any(|w| w[0] != w[1]) {
                return Err(Error::NoUniformThreshold {
                    reason: format!("joint eigenvector {i} has levels {tuple:?}: leading level zero, trailing signs mixed"),
                });
            }
        }
    }
    Ok(delta)
}
