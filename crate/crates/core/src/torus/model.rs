use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol::Tolerances;

/// On-disk form of a [`WeightedModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub name: String,
    pub num_coords: usize,
    pub torus_dim: usize,
    pub weights: Vec<Vec<f64>>,
    pub subalgebra: Vec<Vec<f64>>,
}

/// A diagonal torus action on real projective space.
///
/// Coordinate `i` of `RP^n` carries a weight `lambda_i in R^m`; a direction
/// `beta` in the subalgebra `a ⊆ R^m` acts on it with speed `<lambda_i, beta>`.
/// Vectors of `a` are given in ambient `R^m` coordinates; gradient-map values
/// are reported in coordinates of the orthonormalized subalgebra basis.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedModel {
    name: String,
    weights: Vec<Vec<f64>>,
    subalgebra: Vec<Vec<f64>>,
    /// Orthonormal basis of `a`, obtained by Gram-Schmidt on `subalgebra`.
    frame: Vec<Vec<f64>>,
    /// `pi_a(lambda_i)` in `frame` coordinates.
    projected: Vec<Vec<f64>>,
    tol: Tolerances,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

impl WeightedModel {
    pub fn new(name: impl Into<String>, weights: Vec<Vec<f64>>, subalgebra: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_tolerances(name, weights, subalgebra, Tolerances::default())
    }

    pub fn with_tolerances(
        name: impl Into<String>,
        weights: Vec<Vec<f64>>,
        subalgebra: Vec<Vec<f64>>,
        tol: Tolerances,
    ) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::InvalidModel(format!("need at least 2 coordinates, got {}", weights.len())));
        }
        let m = weights[0].len();
        if m == 0 {
            return Err(Error::InvalidModel("torus dimension must be at least 1".into()));
        }
        for (i, w) in weights.iter().enumerate() {
            if w.len() != m {
                return Err(Error::InvalidModel(format!("weights[{i}] has length {}, expected {m}", w.len())));
            }
            if w.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidModel(format!("weights[{i}] has a non-finite entry")));
            }
        }
        if subalgebra.is_empty() || subalgebra.len() > m {
            return Err(Error::InvalidModel(format!(
                "subalgebra must have between 1 and {m} basis vectors, got {}",
                subalgebra.len()
            )));
        }
        for (k, a) in subalgebra.iter().enumerate() {
            if a.len() != m {
                return Err(Error::InvalidModel(format!("subalgebra[{k}] has length {}, expected {m}", a.len())));
            }
            if a.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidModel(format!("subalgebra[{k}] has a non-finite entry")));
            }
        }
        let sigma_min = smallest_singular_value(&subalgebra);
        if !(sigma_min > tol.rank_tol) {
            return Err(Error::InvalidModel(format!(
                "subalgebra basis is rank deficient (smallest singular value {sigma_min:e})"
            )));
        }
        let frame = orthonormalize(&subalgebra);
        let projected = weights.iter().map(|w| frame.iter().map(|f| dot(f, w)).collect()).collect();
        Ok(Self { name: name.into(), weights, subalgebra, frame, projected, tol })
    }

    pub fn from_file(file: ModelFile) -> Result<Self> {
        if file.num_coords != file.weights.len() {
            return Err(Error::InvalidModel(format!(
                "num_coords = {} but {} weights given",
                file.num_coords,
                file.weights.len()
            )));
        }
        if let Some((i, w)) = file.weights.iter().enumerate().find(|(_, w)| w.len() != file.torus_dim) {
            return Err(Error::InvalidModel(format!(
                "torus_dim = {} but weights[{i}] has length {}",
                file.torus_dim,
                w.len()
            )));
        }
        Self::new(file.name, file.weights, file.subalgebra)
    }

    /// Reads and validates a model file.
    ///
    /// Syntax errors carry the JSON line and column; semantic errors name the
    /// offending field.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| match e {
            Error::ModelParse { message, .. } => Error::ModelParse { path: path.to_path_buf(), message },
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let parse_err = |message: String| Error::ModelParse { path: "<input>".into(), message };
        let file: ModelFile = serde_json::from_str(text)
            .map_err(|e| parse_err(e.to_string()))?;
        Self::from_file(file).map_err(|e| match e {
            Error::InvalidModel(msg) => parse_err(msg),
            other => other,
        })
    }

    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            name: self.name.clone(),
            num_coords: self.num_coords(),
            torus_dim: self.torus_dim(),
            weights: self.weights.clone(),
            subalgebra: self.subalgebra.clone(),
        }
    }

    /// Four coordinates with weights `(0,0), (1,0), (0,1), (1,1)` and `a = R^2`.
    ///
    /// The smallest model with a two-dimensional polytope (the unit square)
    /// in which level ties between coordinates can be produced.
    pub fn unit_square() -> Self {
        Self::new(
            "M1",
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        )
        .expect("valid preset")
    }

    /// Weights `(1,0), (1,0), (0,0)` and `a = R^2`: the fixed set contains a projective line.
    pub fn repeated_weight() -> Self {
        Self::new(
            "M2",
            vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 0.0]],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        )
        .expect("valid preset")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_coords(&self) -> usize {
        self.weights.len()
    }

    pub fn torus_dim(&self) -> usize {
        self.weights[0].len()
    }

    pub fn subalgebra_dim(&self) -> usize {
        self.subalgebra.len()
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn subalgebra(&self) -> &[Vec<f64>] {
        &self.subalgebra
    }

    /// Orthonormal basis of the subalgebra in ambient coordinates.
    pub fn frame(&self) -> &[Vec<f64>] {
        &self.frame
    }

    /// `pi_a(lambda_i)` in frame coordinates.
    pub fn projected_weight(&self, i: usize) -> &[f64] {
        &self.projected[i]
    }

    pub fn projected_weights(&self) -> &[Vec<f64>] {
        &self.projected
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn set_tolerances(&mut self, tol: Tolerances) {
        self.tol = tol;
    }

    /// Frame coordinates of an ambient vector known to lie in `a`.
    pub fn to_frame(&self, beta: &[f64]) -> Vec<f64> {
        self.frame.iter().map(|f| dot(f, beta)).collect()
    }

    /// Ambient vector with the given frame coordinates.
    pub fn from_frame(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.torus_dim()];
        for (c, f) in coeffs.iter().zip(&self.frame) {
            for (o, v) in out.iter_mut().zip(f) {
                *o += c * v;
            }
        }
        out
    }

    /// Checks that `beta` lies in `a` (relative distance at most `1e-9`).
    pub fn check_in_subalgebra(&self, beta: &[f64]) -> Result<()> {
        if beta.len() != self.torus_dim() {
            return Err(Error::DimensionMismatch { expected: self.torus_dim(), actual: beta.len() });
        }
        if beta.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("direction has a non-finite entry".into()));
        }
        let back = self.from_frame(&self.to_frame(beta));
        let residual: Vec<f64> = beta.iter().zip(&back).map(|(b, p)| b - p).collect();
        let distance = norm(&residual);
        if distance > 1e-9 * norm(beta).max(1.0) {
            return Err(Error::BetaOutsideSubalgebra { distance });
        }
        Ok(())
    }

    /// Levels `<lambda_i, beta>` of all coordinates.
    pub fn levels(&self, beta: &[f64]) -> Result<Vec<f64>> {
        self.check_in_subalgebra(beta)?;
        Ok(self.weights.iter().map(|w| dot(w, beta)).collect())
    }

    /// Absolute level tolerance for a level vector.
    pub fn level_tol(&self, levels: &[f64]) -> f64 {
        self.tol.level_tol(levels.iter().copied())
    }
}

fn orthonormalize(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = v.clone();
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for f in &frame {
                let c = dot(f, &w);
                w.iter_mut().zip(f).for_each(|(x, y)| *x -= c * y);
            }
        }
        let n = norm(&w);
        w.iter_mut().for_each(|x| *x /= n);
        frame.push(w);
    }
    frame
}

fn smallest_singular_value(rows: &[Vec<f64>]) -> f64 {
    let m = nalgebra::DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
    m.singular_values().iter().copied().fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        let m1 = WeightedModel::unit_square();
        assert_eq!((m1.num_coords(), m1.torus_dim(), m1.subalgebra_dim()), (4, 2, 2));
        assert_eq!(m1.projected_weight(3), &[1.0, 1.0]);
        let m2 = WeightedModel::repeated_weight();
        assert_eq!(m2.num_coords(), 3);
    }

    #[test]
    fn rank_deficient_subalgebra_rejected() {
        let err = WeightedModel::new("bad", vec![vec![0.0, 0.0], vec![1.0, 0.0]], vec![vec![1.0, 1.0], vec![2.0, 2.0]])
            .unwrap_err();
        assert!(matches!(err, Error::InvalidModel(_)));
    }

    #[test]
    fn beta_outside_subalgebra() {
        let m = WeightedModel::new("line", vec![vec![0.0, 0.0], vec![1.0, 2.0]], vec![vec![1.0, 0.0]]).unwrap();
        assert!(m.levels(&[3.0, 0.0]).is_ok());
        assert!(matches!(m.levels(&[0.0, 1.0]), Err(Error::BetaOutsideSubalgebra { .. })));
        assert!(matches!(m.levels(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn frame_round_trip() {
        let m = WeightedModel::new("skew", vec![vec![0.0, 0.0], vec![1.0, 2.0]], vec![vec![1.0, 1.0], vec![0.0, 3.0]]).unwrap();
        let beta = [0.3, -1.7];
        let back = m.from_frame(&m.to_frame(&beta));
        assert!((back[0] - beta[0]).abs() < 1e-14 && (back[1] - beta[1]).abs() < 1e-14);
    }

    #[test]
    fn parse_errors_carry_location() {
        let err = WeightedModel::parse("{\"name\": \"x\",\n \"num_coords\": }").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "{msg}");

        let err = WeightedModel::parse(
            r#"{"name":"x","num_coords":3,"torus_dim":1,"weights":[[0],[1]],"subalgebra":[[1]]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("num_coords"), "{err}");

        let err = WeightedModel::parse(
            r#"{"name":"x","num_coords":2,"torus_dim":2,"weights":[[0,0],[1]],"subalgebra":[[1,0]]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("weights[1]"), "{err}");
    }

    #[test]
    fn file_round_trip() {
        let m1 = WeightedModel::unit_square();
        let text = serde_json::to_string(&m1.to_file()).unwrap();
        assert_eq!(WeightedModel::parse(&text).unwrap(), m1);
    }
}
