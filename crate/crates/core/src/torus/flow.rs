use crate::error::{Error, Result};
use crate::spectral::Threshold;

use super::model::WeightedModel;
use super::point::ProjPoint;

fn check_point(model: &WeightedModel, x: &ProjPoint) -> Result<()> {
    if x.len() != model.num_coords() {
        return Err(Error::DimensionMismatch { expected: model.num_coords(), actual: x.len() });
    }
    Ok(())
}

/// `mu_a(x) = pi_a(sum_i x_i^2 lambda_i)` in frame coordinates.
///
/// The metric on `RP^n` is twice the round metric on unit representatives,
/// which makes `grad <mu_a, beta> = beta_X` with no factor `1/2`, and sends the
/// coordinate point `e_i` to `pi_a(lambda_i)`.
pub fn gradient_map(model: &WeightedModel, x: &ProjPoint) -> Vec<f64> {
    let mut out = vec![0.0; model.subalgebra_dim()];
    for (xi, p) in x.coords().iter().zip(model.projected_weights()) {
        let w = xi * xi;
        for (o, v) in out.iter_mut().zip(p) {
            *o += w * v;
        }
    }
    out
}

/// Gradient map recentred at `beta`: `mu_a(x) - beta` in frame coordinates.
///
/// For an abelian subalgebra the centralizer of `beta` is all of `a`, so the
/// recentred map of the centralizer action is a plain translation of
/// [`gradient_map`]; it shares its gradients and fixed points.
pub fn shifted_gradient_map(model: &WeightedModel, beta: &[f64], x: &ProjPoint) -> Result<Vec<f64>> {
    model.check_in_subalgebra(beta)?;
    let shift = model.to_frame(beta);
    Ok(gradient_map(model, x).iter().zip(&shift).map(|(m, b)| m - b).collect())
}

/// `<mu_a(x), beta> = sum_i x_i^2 <lambda_i, beta>`.
pub fn mu_beta(model: &WeightedModel, beta: &[f64], x: &ProjPoint) -> Result<f64> {
    let levels = model.levels(beta)?;
    Ok(x.coords().iter().zip(&levels).map(|(xi, b)| xi * xi * b).sum())
}

/// `beta_X(x) = Bx - <x, Bx> x` with `B = diag(<lambda_i, beta>)`.
pub fn fundamental_field(model: &WeightedModel, beta: &[f64], x: &ProjPoint) -> Result<Vec<f64>> {
    check_point(model, x)?;
    let levels = model.levels(beta)?;
    Ok(field_from_levels(&levels, x.coords()))
}

pub(crate) fn field_from_levels(levels: &[f64], x: &[f64]) -> Vec<f64> {
    let bx: Vec<f64> = x.iter().zip(levels).map(|(xi, b)| xi * b).collect();
    let q: f64 = x.iter().zip(&bx).map(|(a, b)| a * b).sum();
    bx.iter().zip(x).map(|(b, xi)| b - q * xi).collect()
}

/// `exp(t beta) x`, normalized and canonicalized.
///
/// Each coordinate is scaled by `exp(t b_i - s)` with `s` the largest active
/// exponent, so large `|t|` neither overflows nor loses the dominant terms.
pub fn flow(model: &WeightedModel, beta: &[f64], t: f64, x: &ProjPoint) -> Result<ProjPoint> {
    check_point(model, x)?;
    if !t.is_finite() {
        return Err(Error::Argument("flow time must be finite".into()));
    }
    let levels = model.levels(beta)?;
    let exponents: Vec<f64> = levels.iter().map(|b| t * b).collect();
    let shift = x
        .coords()
        .iter()
        .zip(&exponents)
        .filter(|(xi, _)| **xi != 0.0)
        .map(|(_, e)| *e)
        .fold(f64::NEG_INFINITY, f64::max);
    let y: Vec<f64> = x
        .coords()
        .iter()
        .zip(&exponents)
        .map(|(xi, e)| if *xi == 0.0 { 0.0 } else { xi * (e - shift).exp() })
        .collect();
    ProjPoint::new(y, model.tolerances().supp_tol)
}

/// Indices of the support attaining the top level (within the level tolerance).
pub(crate) fn top_class(model: &WeightedModel, levels: &[f64], support: &[usize]) -> Vec<usize> {
    let tol = model.level_tol(levels);
    let top = support.iter().map(|&i| levels[i]).fold(f64::NEG_INFINITY, f64::max);
    support.iter().copied().filter(|&i| levels[i] >= top - tol).collect()
}

/// `lim_{t -> +inf} exp(t beta) x`.
///
/// The limit keeps exactly the support coordinates of maximal level. Ties are
/// kept as a whole class, which is where the flow actually converges.
pub fn flow_limit(model: &WeightedModel, beta: &[f64], x: &ProjPoint) -> Result<ProjPoint> {
    check_point(model, x)?;
    let levels = model.levels(beta)?;
    let keep = top_class(model, &levels, x.support());
    Ok(x.restrict(&keep, model.tolerances().supp_tol))
}

/// Checks that `alphas` is a basis of the subalgebra.
pub fn check_basis(model: &WeightedModel, alphas: &[Vec<f64>]) -> Result<()> {
    let d = model.subalgebra_dim();
    if alphas.len() != d {
        return Err(Error::DependentBasis(format!("expected {d} vectors, got {}", alphas.len())));
    }
    for a in alphas {
        model.check_in_subalgebra(a)?;
    }
    let coords = nalgebra::DMatrix::from_fn(d, d, |i, j| model.to_frame(&alphas[i])[j]);
    let sv = coords.singular_values();
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let smax = sv.iter().copied().fold(0.0f64, f64::max);
    if !(smin > model.tolerances().rank_tol * smax.max(1.0)) {
        return Err(Error::DependentBasis(format!("smallest singular value {smin:e}")));
    }
    Ok(())
}

/// `phi^{alpha_n} o ... o phi^{alpha_1}(x)`: successive flow limits along an ordered basis.
pub fn composed_limit(model: &WeightedModel, alphas: &[Vec<f64>], x: &ProjPoint) -> Result<ProjPoint> {
    check_basis(model, alphas)?;
    check_point(model, x)?;
    let mut current = x.clone();
    for a in alphas {
        current = flow_limit(model, a, &current)?;
    }
    Ok(current)
}

/// `alpha_1 + sum_k eps_k alpha_k`.
pub fn perturbed_direction(alphas: &[Vec<f64>], eps: &[f64]) -> Result<Vec<f64>> {
    if alphas.is_empty() {
        return Err(Error::DependentBasis("empty basis".into()));
    }
    if eps.len() + 1 != alphas.len() {
        return Err(Error::Argument(format!("expected {} epsilons, got {}", alphas.len() - 1, eps.len())));
    }
    if let Some(&bad) = eps.iter().find(|e| !(**e > 0.0)) {
        return Err(Error::NonPositiveEpsilon(bad));
    }
    let mut beta = alphas[0].clone();
    for (a, e) in alphas[1..].iter().zip(eps) {
        beta.iter_mut().zip(a).for_each(|(b, v)| *b += e * v);
    }
    Ok(beta)
}

/// Flow limit along `alpha_1 + eps_2 alpha_2 + ... + eps_n alpha_n`.
pub fn perturbed_limit(model: &WeightedModel, alphas: &[Vec<f64>], eps: &[f64], x: &ProjPoint) -> Result<ProjPoint> {
    let beta = perturbed_direction(alphas, eps)?;
    check_basis(model, alphas)?;
    flow_limit(model, &beta, x)
}

/// Uniform bound `delta` such that, for every `eps in (0, delta)^(n-1)`, the
/// perturbed direction orders every pair of coordinates as the level tuples
/// `(<lambda_i, alpha_1>, ..., <lambda_i, alpha_n>)` do lexicographically.
///
/// For a weight difference `d` with `d_1 != 0` the bound is
/// `|d_1| / sum_{k>1} |d_k|`. A difference with `d_1 = 0` never constrains
/// when its nonzero trailing entries share a sign; if their signs are mixed,
/// `sum_k eps_k d_k` vanishes somewhere in every box and
/// [`Error::NoUniformThreshold`] is returned.
pub fn model_chain_threshold(model: &WeightedModel, alphas: &[Vec<f64>]) -> Result<Threshold> {
    check_basis(model, alphas)?;
    let table: Vec<Vec<f64>> = alphas.iter().map(|a| model.levels(a)).collect::<Result<_>>()?;
    let tols: Vec<f64> = table.iter().map(|row| model.level_tol(row)).collect();
    let n = model.num_coords();
    let mut delta = Threshold::INFINITE;
    for i in 0..n {
        for j in (i + 1)..n {
            let d: Vec<f64> = table.iter().map(|row| row[i] - row[j]).collect();
            let nonzero = |k: usize| d[k].abs() > tols[k];
            if nonzero(0) {
                let rest: f64 = (1..d.len()).filter(|&k| nonzero(k)).map(|k| d[k].abs()).sum();
                if rest > 0.0 {
                    delta = delta.min(Threshold::new(d[0].abs() / rest));
                }
            } else {
                let signs: Vec<bool> = (1..d.len()).filter(|&k| nonzero(k)).map(|k| d[k] > 0.0).collect();
                if signs.windows(2).any(|w| w[0] != w[1]) {
                    return Err(Error::NoUniformThreshold {
                        reason: format!("coordinates {i} and {j} have level differences {d:?}"),
                    });
                }
            }
        }
    }
    Ok(delta)
}
