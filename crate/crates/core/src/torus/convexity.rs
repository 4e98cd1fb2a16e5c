//! Sampled checks of the convexity statements for the gradient map.

use rand::Rng;
use serde::Serialize;

use crate::rng;

use super::flow::{flow, flow_limit, gradient_map};
use super::model::WeightedModel;
use super::point::ProjPoint;
use super::polytope::{relative_interior_margin, Polytope};

/// The moment polytope of a model: the hull of the projected weights.
pub fn moment_polytope(model: &WeightedModel) -> Polytope {
    Polytope::hull_of(model.projected_weights(), model.tolerances().hull_tol)
}

#[derive(Debug, Clone, Serialize)]
pub struct PolytopeCheck {
    pub polytope: Polytope,
    pub holds: bool,
    /// Largest distance of a sampled image from the polytope.
    pub max_distance: f64,
    /// Every vertex equals `mu_a(e_i)` for some coordinate point.
    pub vertices_attained: bool,
}

/// Samples `mu_a` on random points (dense and sparse supports alternately)
/// and checks that every image lies in the weight hull.
pub fn moment_polytope_check(model: &WeightedModel, sample_count: usize, seed: u64) -> PolytopeCheck {
    let polytope = moment_polytope(model);
    let tol = model.tolerances();
    let n = model.num_coords();
    let mut rng = rng::substream(seed, 0);
    let mut max_distance = 0.0f64;
    for s in 0..sample_count {
        let coords = if s % 2 == 0 { rng::unit_vector(&mut rng, n) } else { rng::sparse_vector(&mut rng, n, 0.5) };
        let x = ProjPoint::new(coords, tol.supp_tol).expect("nonzero sample");
        max_distance = max_distance.max(polytope.distance(&gradient_map(model, &x)));
    }
    let images: Vec<Vec<f64>> = (0..n).map(|i| gradient_map(model, &ProjPoint::coordinate(n, i))).collect();
    let vertices_attained = polytope.vertices.iter().all(|v| images.iter().any(|p| p == v));
    PolytopeCheck { holds: max_distance <= tol.hull_tol && vertices_attained, polytope, max_distance, vertices_attained }
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitHullCheck {
    /// `conv{pi_a(lambda_i) : i in supp x}`.
    pub hull: Polytope,
    pub holds: bool,
    /// Smallest relative-interior margin over the sampled orbit points.
    pub min_margin: f64,
    /// Every hull vertex is the image of a flow limit along its separating direction.
    pub vertices_reached: bool,
    /// Largest distance from the hull of a limit image along a random direction.
    pub max_limit_distance: f64,
}

/// Checks that the closure of `mu_a(A x)` is `conv{pi_a(lambda_i) : i in supp x}`.
///
/// Orbit points `exp(beta) x` must map into the relative interior of the
/// hull, each vertex must be reached as the image of a flow limit, and limits
/// along random integer directions must land in the hull.
pub fn orbit_hull_check(model: &WeightedModel, x: &ProjPoint, sample_count: usize, seed: u64) -> OrbitHullCheck {
    let tol = model.tolerances();
    let d = model.subalgebra_dim();
    let points: Vec<Vec<f64>> = x.support().iter().map(|&i| model.projected_weight(i).to_vec()).collect();
    let hull = Polytope::hull_of(&points, tol.hull_tol);
    let radius = 1.0 / (1.0 + points.iter().map(|p| p.iter().map(|v| v * v).sum::<f64>().sqrt()).fold(0.0, f64::max));
    let scale = points.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut rng = rng::substream(seed, 1);

    let mut min_margin = f64::INFINITY;
    for _ in 0..sample_count {
        let r = radius * rng.random::<f64>();
        let w: Vec<f64> = rng::unit_vector(&mut rng, d).into_iter().map(|v| r * v).collect();
        let y = flow(model, &model.from_frame(&w), 1.0, x).expect("direction in the subalgebra");
        let margin = relative_interior_margin(&hull.vertices_or(&points), &gradient_map(model, &y), 1e-12 * scale);
        min_margin = min_margin.min(margin);
    }
    let interior_ok = hull.vertices.len() == 1 || min_margin > tol.hull_tol;

    let vertices_reached = (0..hull.vertices.len()).all(|k| {
        let w = hull.separating_direction(k);
        let limit = flow_limit(model, &model.from_frame(&w), x).expect("direction in the subalgebra");
        let image = gradient_map(model, &limit);
        image.iter().zip(&hull.vertices[k]).all(|(a, b)| (a - b).abs() <= tol.hull_tol)
    });

    let mut max_limit_distance = 0.0f64;
    for _ in 0..sample_count {
        let w: Vec<f64> = (0..d).map(|_| rng.random_range(-3i32..=3) as f64).collect();
        let limit = flow_limit(model, &model.from_frame(&w), x).expect("direction in the subalgebra");
        max_limit_distance = max_limit_distance.max(hull.distance(&gradient_map(model, &limit)));
    }

    let holds = interior_ok && vertices_reached && max_limit_distance <= tol.hull_tol;
    OrbitHullCheck { hull, holds, min_margin, vertices_reached, max_limit_distance }
}

impl Polytope {
    fn vertices_or(&self, fallback: &[Vec<f64>]) -> Vec<Vec<f64>> {
        if self.vertices.is_empty() { fallback.to_vec() } else { self.vertices.clone() }
    }
}
