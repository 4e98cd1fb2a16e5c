//! Linear algebra for commuting families of symmetric operators.
//!
//! Commuting symmetric matrices share an orthonormal eigenbasis. Along each
//! joint eigenvector the pencil `alpha + eps * beta` acts by `a_i + eps * b_i`,
//! so its kernel can only grow past `Ker alpha ∩ Ker beta` once
//! `eps >= |a_i| / |b_i|` for some index where both levels are nonzero.

mod family;
mod subspace;
mod symmat;
mod threshold;

pub use family::{joint_diagonalize, CommutingFamily, JointSpectrum, COMM_REL_TOL};
pub use subspace::{kernel, subspace_intersection, Subspace, ORTHO_TOL};
pub use symmat::{commutator_norm, SymMat, SYM_REL_TOL};
pub use threshold::{
    chain_threshold, default_kernel_tol, delta_threshold, joint_kernel, kernel_jumps_at_threshold,
    perturbed_kernel_equality, KernelReport, Threshold, INTERSECTION_TOL, SUBSPACE_MATCH_TOL,
};

