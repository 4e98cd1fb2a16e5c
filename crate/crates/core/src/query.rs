//! Argument parsing and one-shot queries behind the command-line tool.
//!
//! Every query returns a `serde_json::Value`; floats are written in shortest
//! round-trip form, so printed results are bit-exact.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::spectral::{default_kernel_tol, delta_threshold, SymMat, Threshold};
use crate::torus::{
    composed_limit, fixed_components, fixed_set_subalgebra, flow, flow_limit, model_chain_threshold, moment_polytope,
    perturbed_limit, stabilizer_algebra, ProjPoint, WeightedModel,
};

/// Parses `"1,0,-2.5"` or a JSON array.
pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    let t = text.trim();
    if t.starts_with('[') {
        return serde_json::from_str(t).map_err(|e| Error::Argument(format!("bad vector {t:?}: {e}")));
    }
    t.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>().map_err(|_| Error::Argument(format!("bad number {s:?} in vector {t:?}")))
        })
        .collect()
}

/// Parses a list of vectors: `"1,0;0,1"` or a JSON array of arrays.
pub fn parse_vectors(text: &str) -> Result<Vec<Vec<f64>>> {
    let t = text.trim();
    if t.starts_with('[') {
        return serde_json::from_str(t).map_err(|e| Error::Argument(format!("bad vector list {t:?}: {e}")));
    }
    t.split(';').map(parse_vector).collect()
}

/// Parses a symmetric matrix: `"diag:2,0,1"`, rows `"1,2;2,1"`, or JSON rows.
pub fn parse_matrix(text: &str) -> Result<SymMat> {
    let t = text.trim();
    if let Some(entries) = t.strip_prefix("diag:") {
        return Ok(SymMat::diag(&parse_vector(entries)?));
    }
    SymMat::from_rows(&parse_vectors(t)?)
}

pub fn parse_point(model: &WeightedModel, text: &str) -> Result<ProjPoint> {
    let coords = parse_vector(text)?;
    if coords.len() != model.num_coords() {
        return Err(Error::DimensionMismatch { expected: model.num_coords(), actual: coords.len() });
    }
    ProjPoint::new(coords, model.tolerances().supp_tol)
}

fn threshold_value(t: Threshold) -> Value {
    t.finite().map_or_else(|| json!("inf"), |v| json!(v))
}

fn point_value(x: &ProjPoint) -> Value {
    json!({"coords": x.coords(), "support": x.support()})
}

/// Dimensions, weights, components of `X^A`, moment polytope and the chain
/// threshold of the stored subalgebra basis.
pub fn describe_model(model: &WeightedModel) -> Value {
    let chain = match model_chain_threshold(model, model.subalgebra()) {
        Ok(t) => threshold_value(t),
        Err(e) => json!({"error": e.to_string()}),
    };
    json!({
        "name": model.name(),
        "num_coords": model.num_coords(),
        "torus_dim": model.torus_dim(),
        "subalgebra_dim": model.subalgebra_dim(),
        "weights": model.weights(),
        "subalgebra": model.subalgebra(),
        "frame": model.frame(),
        "fixed_components": fixed_set_subalgebra(model),
        "polytope_vertices": moment_polytope(model).vertices,
        "chain_threshold": chain,
    })
}

pub fn flow_query(model: &WeightedModel, beta: &[f64], t: f64, x: &ProjPoint) -> Result<Value> {
    Ok(point_value(&flow(model, beta, t, x)?))
}

pub fn limit_query(model: &WeightedModel, beta: &[f64], x: &ProjPoint) -> Result<Value> {
    Ok(point_value(&flow_limit(model, beta, x)?))
}

pub fn composed_query(model: &WeightedModel, alphas: &[Vec<f64>], x: &ProjPoint) -> Result<Value> {
    Ok(point_value(&composed_limit(model, alphas, x)?))
}

pub fn perturbed_query(model: &WeightedModel, alphas: &[Vec<f64>], eps: &[f64], x: &ProjPoint) -> Result<Value> {
    let perturbed = perturbed_limit(model, alphas, eps, x)?;
    let composed = composed_limit(model, alphas, x)?;
    Ok(json!({
        "limit": point_value(&perturbed),
        "composed": point_value(&composed),
        "agrees": perturbed == composed,
    }))
}

/// `tol` defaults to `1e-12 * max|entry|`.
pub fn delta_query(alpha: &SymMat, beta: &SymMat, tol: Option<f64>) -> Result<Value> {
    let tol = tol.unwrap_or_else(|| default_kernel_tol(&[alpha, beta]));
    Ok(json!({"delta": threshold_value(delta_threshold(alpha, beta, tol)?)}))
}

pub fn stabilizer_query(model: &WeightedModel, x: &ProjPoint) -> Result<Value> {
    let s = stabilizer_algebra(model, x)?;
    Ok(json!({"dim": s.dim(), "basis": s.to_rows()}))
}

/// Components of `X^beta`, or of `X^A` when `beta` is absent.
pub fn components_query(model: &WeightedModel, beta: Option<&[f64]>) -> Result<Value> {
    Ok(match beta {
        Some(b) => serde_json::to_value(fixed_components(model, b)?)?,
        None => serde_json::to_value(fixed_set_subalgebra(model))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parsing() {
        assert_eq!(parse_vector("1, 0,-2.5").unwrap(), vec![1.0, 0.0, -2.5]);
        assert_eq!(parse_vector("[1,2]").unwrap(), vec![1.0, 2.0]);
        assert!(parse_vector("1,x").is_err());
        assert_eq!(parse_vectors("1,0;0,1").unwrap(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(parse_matrix("diag:2,0,1").unwrap(), SymMat::diag(&[2.0, 0.0, 1.0]));
        assert_eq!(parse_matrix("[[1,2],[2,1]]").unwrap(), parse_matrix("1,2;2,1").unwrap());
        assert!(matches!(parse_matrix("1,2;3,1"), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn queries_on_the_square() {
        let m1 = WeightedModel::unit_square();
        let x = parse_point(&m1, "1,1,1,1").unwrap();
        let lim = limit_query(&m1, &[1.0, 0.0], &x).unwrap();
        assert_eq!(lim["support"], json!([1, 3]));
        let c: Vec<f64> = serde_json::from_value(lim["coords"].clone()).unwrap();
        assert!(c.iter().zip([0.0, 0.5f64.sqrt(), 0.0, 0.5f64.sqrt()]).all(|(a, b)| (a - b).abs() < 1e-15));
        assert_eq!(flow_query(&m1, &[1.0, 0.0], 0.0, &x).unwrap(), point_value(&x));
        let d = delta_query(&parse_matrix("diag:2,0,1").unwrap(), &parse_matrix("diag:1,3,-1").unwrap(), None).unwrap();
        assert_eq!(d, json!({"delta": 1.0}));
        let desc = describe_model(&m1);
        assert_eq!(desc["chain_threshold"], json!(1.0));
        assert_eq!(desc["fixed_components"].as_array().unwrap().len(), 4);
        assert_eq!(desc["polytope_vertices"].as_array().unwrap().len(), 4);
        let p = perturbed_query(&m1, m1.subalgebra(), &[1.0], &parse_point(&m1, "0,1,1,0").unwrap()).unwrap();
        assert_eq!(p["agrees"], json!(false));
    }
}
