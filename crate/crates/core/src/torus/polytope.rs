//! Convex hulls of small point sets in low dimension.
//!
//! Everything reduces to one primitive: the nearest point of `conv(P)` to a
//! query, found with Wolfe's minimum-norm-point algorithm. It is finite and
//! exact up to rounding for the handful of points a weight polytope has.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

/// Nearest point of `conv(points)` to `query`.
#[derive(Debug, Clone)]
pub struct Projection {
    pub distance: f64,
    pub nearest: Vec<f64>,
    /// Convex weights over `points`.
    pub weights: Vec<f64>,
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizer of `|sum_i w_i q_i|` over the affine hull of the selected points.
///
/// Solved as least squares in the edge vectors `q_k - q_0`, which is far
/// better conditioned than the bordered Gram system.
fn affine_minimizer(q: &[Vec<f64>], active: &[usize]) -> Vec<f64> {
    let k = active.len();
    if k == 1 {
        return vec![1.0];
    }
    let dim = q[0].len();
    let base = &q[active[0]];
    let edges = DMatrix::from_fn(dim, k - 1, |r, c| q[active[c + 1]][r] - base[r]);
    let rhs = DVector::from_iterator(dim, base.iter().map(|v| -v));
    let scale = edges.amax().max(1e-300);
    let c = edges
        .svd(true, true)
        .solve(&rhs, 1e-13 * scale)
        .expect("svd solve with both factors");
    let mut w = Vec::with_capacity(k);
    w.push(1.0 - c.sum());
    w.extend(c.iter().copied());
    w
}

fn combine(q: &[Vec<f64>], active: &[usize], w: &[f64]) -> Vec<f64> {
    let dim = q[0].len();
    let mut x = vec![0.0; dim];
    for (&i, &wi) in active.iter().zip(w) {
        x.iter_mut().zip(&q[i]).for_each(|(a, b)| *a += wi * b);
    }
    x
}

/// Distance from `query` to the convex hull of `points` (Wolfe, 1976).
pub fn project_onto_hull(points: &[Vec<f64>], query: &[f64]) -> Projection {
    assert!(!points.is_empty(), "hull of an empty set");
    let q: Vec<Vec<f64>> = points.iter().map(|p| sub(p, query)).collect();
    let qmax = q.iter().map(|p| dot(p, p)).fold(0.0f64, f64::max).sqrt().max(1e-300);

    let start = (0..q.len()).min_by(|&a, &b| dot(&q[a], &q[a]).total_cmp(&dot(&q[b], &q[b]))).unwrap();
    let mut active = vec![start];
    let mut lambda = vec![1.0];
    let mut x = q[start].clone();

    for _ in 0..(50 * q.len() + 50) {
        let xx = dot(&x, &x);
        let (j, best) = (0..q.len())
            .map(|j| (j, dot(&x, &q[j])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        // the optimality gap xx - best is resolved to rounding of order |x| |q|
        if xx - best <= 1e-12 * xx.sqrt() * qmax || active.contains(&j) {
            break;
        }
        active.push(j);
        lambda.push(0.0);
        loop {
            let alpha = affine_minimizer(&q, &active);
            if alpha.iter().all(|&a| a > 1e-15) {
                lambda = alpha;
                x = combine(&q, &active, &lambda);
                break;
            }
            let theta = lambda
                .iter()
                .zip(&alpha)
                .filter(|(_, &a)| a <= 1e-15)
                .map(|(&l, &a)| l / (l - a))
                .fold(1.0f64, f64::min);
            for (l, a) in lambda.iter_mut().zip(&alpha) {
                *l += theta * (a - *l);
            }
            let mut keep_a = Vec::new();
            let mut keep_l = Vec::new();
            for (i, &l) in active.iter().zip(&lambda) {
                if l > 1e-15 {
                    keep_a.push(*i);
                    keep_l.push(l);
                }
            }
            if keep_a.is_empty() {
                // numerically degenerate step: keep the heaviest point
                let (i, _) = active.iter().zip(&lambda).max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
                keep_a = vec![*i];
                keep_l = vec![1.0];
            }
            let total: f64 = keep_l.iter().sum();
            active = keep_a;
            lambda = keep_l.into_iter().map(|l| l / total).collect();
            x = combine(&q, &active, &lambda);
            if active.len() == 1 {
                break;
            }
        }
    }

    let mut weights = vec![0.0; points.len()];
    for (&i, &l) in active.iter().zip(&lambda) {
        weights[i] += l;
    }
    let nearest: Vec<f64> = x.iter().zip(query).map(|(a, b)| a + b).collect();
    Projection { distance: dot(&x, &x).sqrt(), nearest, weights }
}

/// A convex polytope given by an irredundant vertex list.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polytope {
    pub vertices: Vec<Vec<f64>>,
}

impl Polytope {
    /// Convex hull of `points`; a point is a vertex iff it is farther than
    /// `tol` from the hull of the remaining distinct points.
    pub fn hull_of(points: &[Vec<f64>], tol: f64) -> Self {
        let mut distinct: Vec<Vec<f64>> = Vec::new();
        for p in points {
            if !distinct.iter().any(|d| sub(d, p).iter().all(|v| v.abs() <= tol)) {
                distinct.push(p.clone());
            }
        }
        if distinct.len() <= 1 {
            return Self { vertices: distinct };
        }
        let vertices = (0..distinct.len())
            .filter(|&k| {
                let others: Vec<Vec<f64>> =
                    distinct.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, p)| p.clone()).collect();
                project_onto_hull(&others, &distinct[k]).distance > tol
            })
            .map(|k| distinct[k].clone())
            .collect();
        Self { vertices }
    }

    pub fn dim(&self) -> usize {
        self.vertices.first().map_or(0, |v| v.len())
    }

    pub fn distance(&self, q: &[f64]) -> f64 {
        project_onto_hull(&self.vertices, q).distance
    }

    pub fn contains(&self, q: &[f64], tol: f64) -> bool {
        self.distance(q) <= tol
    }

    pub fn has_vertex(&self, v: &[f64], tol: f64) -> bool {
        self.vertices.iter().any(|w| sub(w, v).iter().all(|x| x.abs() <= tol))
    }

    /// A direction `w` with `<v - p, w> > 0` for every other vertex `p`:
    /// `v` minus its projection onto the hull of the other vertices.
    pub fn separating_direction(&self, vertex: usize) -> Vec<f64> {
        let others: Vec<Vec<f64>> =
            self.vertices.iter().enumerate().filter(|(i, _)| *i != vertex).map(|(_, p)| p.clone()).collect();
        if others.is_empty() {
            return vec![0.0; self.dim()];
        }
        let proj = project_onto_hull(&others, &self.vertices[vertex]);
        sub(&self.vertices[vertex], &proj.nearest)
    }
}

/// Largest `eta` such that `q` is a convex combination of `points` with every
/// weight at least `eta`; positive exactly on the relative interior.
///
/// Membership of the rescaled query `(q - eta sum p) / (1 - k eta)` is tested
/// against `member_tol` and `eta` is found by bisection on `[0, 1/k]`.
pub fn relative_interior_margin(points: &[Vec<f64>], q: &[f64], member_tol: f64) -> f64 {
    let k = points.len() as f64;
    let dim = q.len();
    let mut total = vec![0.0; dim];
    for p in points {
        total.iter_mut().zip(p).for_each(|(t, v)| *t += v);
    }
    let inside = |eta: f64| {
        let shifted: Vec<f64> = q.iter().zip(&total).map(|(a, s)| (a - eta * s) / (1.0 - k * eta)).collect();
        project_onto_hull(points, &shifted).distance <= member_tol
    };
    if !inside(0.0) {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0 / k);
    if inside(hi * (1.0 - 1e-12)) {
        return hi;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if inside(mid) { lo = mid } else { hi = mid }
    }
    lo
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Vec<Vec<f64>> {
        vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]
    }

    #[test]
    fn distance_to_square() {
        let sq = square();
        assert!(project_onto_hull(&sq, &[0.5, 0.5]).distance < 1e-15);
        assert!((project_onto_hull(&sq, &[2.0, 0.5]).distance - 1.0).abs() < 1e-14);
        assert!((project_onto_hull(&sq, &[2.0, 2.0]).distance - 2f64.sqrt()).abs() < 1e-14);
        let p = project_onto_hull(&sq, &[-1.0, 0.25]);
        assert!((p.nearest[0]).abs() < 1e-14 && (p.nearest[1] - 0.25).abs() < 1e-14);
        let total: f64 = p.weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn hull_drops_interior_and_duplicate_points() {
        let mut pts = square();
        pts.push(vec![0.5, 0.5]);
        pts.push(vec![1.0, 1.0]);
        pts.push(vec![0.5, 0.0]);
        let poly = Polytope::hull_of(&pts, 1e-9);
        assert_eq!(poly.vertices, square());
    }

    #[test]
    fn degenerate_hulls() {
        let seg = Polytope::hull_of(&[vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 0.0]], 1e-9);
        assert_eq!(seg.vertices, vec![vec![1.0, 0.0], vec![0.0, 0.0]]);
        let pt = Polytope::hull_of(&[vec![2.0, 3.0], vec![2.0, 3.0]], 1e-9);
        assert_eq!(pt.vertices, vec![vec![2.0, 3.0]]);
        assert!(pt.contains(&[2.0, 3.0], 0.0));
    }

    #[test]
    fn separating_directions() {
        let poly = Polytope::hull_of(&square(), 1e-9);
        for v in 0..4 {
            let w = poly.separating_direction(v);
            for (i, p) in poly.vertices.iter().enumerate() {
                if i != v {
                    assert!(dot(&sub(&poly.vertices[v], p), &w) > 0.0);
                }
            }
        }
    }

    #[test]
    fn interior_margin() {
        let sq = square();
        // the centre is the equal-weight combination
        assert!((relative_interior_margin(&sq, &[0.5, 0.5], 1e-12) - 0.25).abs() < 1e-9);
        assert!(relative_interior_margin(&sq, &[0.5, 0.0], 1e-12) < 1e-10);
        assert_eq!(relative_interior_margin(&sq, &[3.0, 0.0], 1e-12), 0.0);
        // segment embedded in the plane: relative interior of a lower-dimensional hull
        let seg = vec![vec![0.0, 0.0], vec![1.0, 0.0]];
        assert!(relative_interior_margin(&seg, &[0.3, 0.0], 1e-12) > 0.29);
    }
}
