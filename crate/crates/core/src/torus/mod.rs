//! Weighted torus actions on real projective space.
//!
//! A model fixes weights `lambda_0, ..., lambda_n in R^m` and a subalgebra
//! `a ⊆ R^m`. The torus `A = exp(a)` acts on `RP^n` diagonally, and
//! everything here (gradient map, flows and their limits, fixed-point sets,
//! stabilizers, polytopes) has a closed form in terms of the levels
//! `<lambda_i, beta>` and the support of a point.

mod convexity;
mod fixed;
mod flow;
mod model;
mod point;
pub mod polytope;

pub use convexity::{moment_polytope, moment_polytope_check, orbit_hull_check, OrbitHullCheck, PolytopeCheck};
pub use fixed::{
    certify_direction, chain_direction, common_refinement, fixed_components, fixed_set_subalgebra, generic_direction,
    joint_partition, level_partition, level_tuples, random_direction, stabilizer_algebra, unstable_component,
    FixedComponent, GenericDirection, JointComponent, Partition, MAX_DIRECTION_DRAWS,
};
pub use flow::{
    check_basis, composed_limit, flow, flow_limit, fundamental_field, gradient_map, model_chain_threshold, mu_beta,
    perturbed_direction, perturbed_limit, shifted_gradient_map,
};
pub(crate) use flow::field_from_levels;
pub use model::{ModelFile, WeightedModel};
pub use point::ProjPoint;
pub use polytope::Polytope;
