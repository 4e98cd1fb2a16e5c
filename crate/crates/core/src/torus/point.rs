use serde::Serialize;

use crate::error::{Error, Result};

/// A point of `RP^n` held by its sign-canonical unit representative.
///
/// The first coordinate of the support is positive. The support is the set of
/// coordinates with `|x_i| > supp_tol`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjPoint {
    coords: Vec<f64>,
    support: Vec<usize>,
}

impl ProjPoint {
    /// Normalizes and canonicalizes an arbitrary nonzero representative.
    pub fn new(coords: Vec<f64>, supp_tol: f64) -> Result<Self> {
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPoint("coordinates must be finite".into()));
        }
        // rescale first so that tiny or huge representatives normalize cleanly
        let max = coords.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if max == 0.0 {
            return Err(Error::InvalidPoint("the zero vector is not a point of projective space".into()));
        }
        let scaled: Vec<f64> = coords.iter().map(|v| v / max).collect();
        let norm = scaled.iter().map(|v| v * v).sum::<f64>().sqrt();
        let unit: Vec<f64> = scaled.iter().map(|v| v / norm).collect();
        Ok(Self::from_unit(unit, supp_tol))
    }

    /// Canonicalizes a representative that is already unit length.
    pub(crate) fn from_unit(mut coords: Vec<f64>, supp_tol: f64) -> Self {
        let support: Vec<usize> = (0..coords.len()).filter(|&i| coords[i].abs() > supp_tol).collect();
        if let Some(&first) = support.first() {
            if coords[first] < 0.0 {
                coords.iter_mut().for_each(|v| *v = -*v);
            }
        }
        Self { coords, support }
    }

    /// The coordinate point `e_i`.
    pub fn coordinate(n: usize, i: usize) -> Self {
        assert!(i < n);
        let mut coords = vec![0.0; n];
        coords[i] = 1.0;
        Self { coords, support: vec![i] }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// `x` restricted to `indices` and renormalized.
    ///
    /// `indices` must meet the support.
    pub(crate) fn restrict(&self, indices: &[usize], supp_tol: f64) -> Self {
        if self.support.iter().all(|i| indices.contains(i)) {
            return self.clone();
        }
        let mut v = vec![0.0; self.coords.len()];
        for &i in indices {
            v[i] = self.coords[i];
        }
        Self::new(v, supp_tol).expect("restriction to a set meeting the support")
    }

    /// Same support and coordinates within `tol`.
    pub fn same_point(&self, other: &ProjPoint, tol: f64) -> bool {
        self.support == other.support
            && self.coords.len() == other.coords.len()
            && self.coords.iter().zip(&other.coords).all(|(a, b)| (a - b).abs() <= tol)
    }

    /// Euclidean distance between canonical representatives.
    pub fn distance(&self, other: &ProjPoint) -> f64 {
        self.coords.iter().zip(&other.coords).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_and_flips_sign() {
        let p = ProjPoint::new(vec![0.0, -3.0, 4.0], 1e-13).unwrap();
        assert_eq!(p.coords(), &[0.0, 0.6, -0.8]);
        assert_eq!(p.support(), &[1, 2]);
    }

    #[test]
    fn zero_vector_rejected() {
        assert!(ProjPoint::new(vec![0.0, 0.0], 1e-13).is_err());
        assert!(ProjPoint::new(vec![f64::NAN, 1.0], 1e-13).is_err());
    }

    #[test]
    fn extreme_scales_normalize() {
        let p = ProjPoint::new(vec![1e-200, 1e-200], 1e-13).unwrap();
        assert!((p.coords()[0] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        let q = ProjPoint::new(vec![1e300, 1e300], 1e-13).unwrap();
        assert!(p.same_point(&q, 0.0));
    }

    #[test]
    fn antipodes_agree() {
        let p = ProjPoint::new(vec![1.0, 2.0, -2.0], 1e-13).unwrap();
        let q = ProjPoint::new(vec![-1.0, -2.0, 2.0], 1e-13).unwrap();
        assert!(p.same_point(&q, 0.0));
    }
}
