//! Commuting gradient flows of weighted torus actions on real projective space.
//!
//! - [`spectral`]: commuting symmetric matrices, joint eigenbases and the
//!   kernel threshold of the pencil `alpha + eps beta`.
//! - [`torus`]: models, exact flows and limits, fixed sets, generic directions
//!   and moment polytopes.
//! - [`numerics`]: RK4 integration, numeric limits, finite-difference and
//!   linearization checks.
//! - [`campaign`]: seeded, reproducible verification runs with JSON reports.
//! - [`query`]: parsing and one-shot queries used by the `gml` binary.
//!
//! ```
//! use gml::torus::{flow_limit, ProjPoint, WeightedModel};
//!
//! let m = WeightedModel::unit_square();
//! let x = ProjPoint::new(vec![1.0, 1.0, 1.0, 1.0], 1e-12).unwrap();
//! assert_eq!(flow_limit(&m, &[0.0, 1.0], &x).unwrap().support(), &[2, 3]);
//! ```

pub mod campaign;
pub mod error;
pub mod numerics;
pub mod query;
pub mod rng;
pub mod spectral;
pub mod tol;
pub mod torus;

pub use error::{Error, Result};
pub use tol::Tolerances;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/thresholds.md")]
    mod thresholds {}
    #[doc = include_str!("../../../book/src/fixed-points.md")]
    mod fixed_points {}
    #[doc = include_str!("../../../book/src/polytopes.md")]
    mod polytopes {}
    #[doc = include_str!("../../../book/src/numerics.md")]
    mod numerics {}
    #[doc = include_str!("../../../book/src/campaigns.md")]
    mod campaigns {}
}
