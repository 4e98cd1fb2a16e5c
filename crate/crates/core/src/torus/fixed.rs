use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng;
use crate::spectral::{kernel, Subspace, SymMat};

use super::flow::{check_basis, model_chain_threshold, perturbed_direction, top_class};
use super::model::WeightedModel;
use super::point::ProjPoint;

/// A connected component of `X^beta`: the projective subspace spanned by one level class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedComponent {
    pub index_set: Vec<usize>,
    /// The critical value of `<mu_a, beta>` on the component.
    pub level: f64,
    pub dim: usize,
}

/// A connected component of `X^A`, labelled by its gradient-map value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointComponent {
    pub index_set: Vec<usize>,
    /// `mu_a` on the component, in frame coordinates.
    pub value: Vec<f64>,
    pub dim: usize,
}

/// A set partition of coordinate indices in canonical form.
pub type Partition = Vec<Vec<usize>>;

fn canonical(mut parts: Partition) -> Partition {
    parts.iter_mut().for_each(|p| p.sort_unstable());
    parts.sort();
    parts
}

/// Groups indices by level; classes in descending level order.
fn level_classes(levels: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..levels.len()).collect();
    order.sort_by(|&a, &b| levels[b].total_cmp(&levels[a]).then(a.cmp(&b)));
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (w, &i) in order.iter().enumerate() {
        if w > 0 && levels[order[w - 1]] - levels[i] <= tol {
            classes.last_mut().expect("nonempty").push(i);
        } else {
            classes.push(vec![i]);
        }
    }
    classes.iter_mut().for_each(|c| c.sort_unstable());
    classes
}

/// Components of `X^beta`, sorted by critical value `c_1 > c_2 > ... > c_k`.
pub fn fixed_components(model: &WeightedModel, beta: &[f64]) -> Result<Vec<FixedComponent>> {
    let levels = model.levels(beta)?;
    let tol = model.level_tol(&levels);
    Ok(level_classes(&levels, tol)
        .into_iter()
        .map(|index_set| FixedComponent {
            level: levels[index_set[0]],
            dim: index_set.len() - 1,
            index_set,
        })
        .collect())
}

/// Components of `X^A`: coordinates grouped by projected weight, in
/// descending lexicographic order of the value.
pub fn fixed_set_subalgebra(model: &WeightedModel) -> Vec<JointComponent> {
    let projected = model.projected_weights();
    let tol = model.tolerances().level_tol(projected.iter().flatten().copied());
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..projected.len() {
        let same = |g: &Vec<usize>| {
            projected[g[0]].iter().zip(&projected[i]).all(|(a, b)| (a - b).abs() <= tol)
        };
        match groups.iter_mut().find(|g| same(g)) {
            Some(g) => g.push(i),
            None => groups.push(vec![i]),
        }
    }
    let mut comps: Vec<JointComponent> = groups
        .into_iter()
        .map(|index_set| JointComponent {
            value: projected[index_set[0]].clone(),
            dim: index_set.len() - 1,
            index_set,
        })
        .collect();
    comps.sort_by(|a, b| {
        b.value
            .iter()
            .zip(&a.value)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    comps
}

pub fn level_partition(model: &WeightedModel, beta: &[f64]) -> Result<Partition> {
    Ok(canonical(fixed_components(model, beta)?.into_iter().map(|c| c.index_set).collect()))
}

pub fn joint_partition(model: &WeightedModel) -> Partition {
    canonical(fixed_set_subalgebra(model).into_iter().map(|c| c.index_set).collect())
}

/// Common refinement of several partitions.
pub fn common_refinement(parts: &[Partition], n: usize) -> Partition {
    let mut labels: Vec<Vec<usize>> = vec![Vec::new(); n];
    for p in parts {
        for (k, block) in p.iter().enumerate() {
            for &i in block {
                labels[i].push(k);
            }
        }
    }
    let mut groups: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    for (i, label) in labels.into_iter().enumerate() {
        match groups.iter_mut().find(|(l, _)| *l == label) {
            Some((_, g)) => g.push(i),
            None => groups.push((label, vec![i])),
        }
    }
    canonical(groups.into_iter().map(|(_, g)| g).collect())
}

/// True iff `X^beta = X^A`, i.e. `beta` separates every pair of coordinates
/// with distinct projected weights.
pub fn certify_direction(model: &WeightedModel, beta: &[f64]) -> Result<bool> {
    Ok(level_partition(model, beta)? == joint_partition(model))
}

/// A uniformly random unit direction of the subalgebra, in ambient coordinates.
pub fn random_direction<R: rand::Rng + ?Sized>(model: &WeightedModel, rng: &mut R) -> Vec<f64> {
    model.from_frame(&rng::unit_vector(rng, model.subalgebra_dim()))
}

/// Maximum number of draws made by [`generic_direction`].
pub const MAX_DIRECTION_DRAWS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenericDirection {
    pub beta: Vec<f64>,
    pub certificate: bool,
    pub attempts: usize,
}

/// Draws unit directions of the subalgebra until one satisfies `X^beta = X^A`.
pub fn generic_direction(model: &WeightedModel, seed: u64) -> Result<GenericDirection> {
    let mut rng = rng::substream(seed, 0);
    for attempt in 1..=MAX_DIRECTION_DRAWS {
        let beta = random_direction(model, &mut rng);
        if certify_direction(model, &beta)? {
            return Ok(GenericDirection { beta, certificate: true, attempts: attempt });
        }
    }
    Err(Error::ExhaustedRetries(MAX_DIRECTION_DRAWS))
}

/// The direction `alpha_1 + eps (alpha_2 + ... + alpha_n)` with `eps` half the
/// uniform chain threshold (`eps = 1` when the threshold is infinite).
pub fn chain_direction(model: &WeightedModel, alphas: &[Vec<f64>]) -> Result<GenericDirection> {
    let delta = model_chain_threshold(model, alphas)?;
    let eps = delta.finite().map_or(1.0, |d| 0.5 * d);
    let beta = perturbed_direction(alphas, &vec![eps; alphas.len() - 1])?;
    let certificate = certify_direction(model, &beta)?;
    Ok(GenericDirection { beta, certificate, attempts: 1 })
}

/// The component of `X^beta` into which `x` flows (its unstable-manifold label).
pub fn unstable_component(model: &WeightedModel, beta: &[f64], x: &ProjPoint) -> Result<FixedComponent> {
    if x.len() != model.num_coords() {
        return Err(Error::DimensionMismatch { expected: model.num_coords(), actual: x.len() });
    }
    let levels = model.levels(beta)?;
    let top = top_class(model, &levels, x.support());
    let comps = fixed_components(model, beta)?;
    comps
        .into_iter()
        .find(|c| c.index_set.contains(&top[0]))
        .ok_or_else(|| Error::Argument("flow limit outside every component".into()))
}

/// Infinitesimal stabilizer `a_x = {beta in a : <lambda_i - lambda_j, beta> = 0 for i, j in supp x}`,
/// in ambient coordinates.
///
/// The stabilizer of `x` in `A = exp(a)` is exactly `exp(a_x)`: a direction
/// whose time-one flow fixes `x` already fixes it infinitesimally.
pub fn stabilizer_algebra(model: &WeightedModel, x: &ProjPoint) -> Result<Subspace> {
    if x.len() != model.num_coords() {
        return Err(Error::DimensionMismatch { expected: model.num_coords(), actual: x.len() });
    }
    let d = model.subalgebra_dim();
    let m = model.torus_dim();
    let support = x.support();
    let base = model.projected_weight(support[0]);
    let mut gram = nalgebra::DMatrix::<f64>::zeros(d, d);
    let mut scale = 0.0f64;
    for &i in &support[1..] {
        let diff = nalgebra::DVector::from_iterator(
            d,
            model.projected_weight(i).iter().zip(base).map(|(a, b)| a - b),
        );
        scale = scale.max(diff.amax());
        gram += &diff * diff.transpose();
    }
    let frame_kernel = if scale == 0.0 {
        Subspace::full(d)
    } else {
        let g = SymMat::from_matrix(gram)?;
        kernel(&g, 1e-14 * scale * scale * support.len() as f64)
    };
    let cols: Vec<nalgebra::DVector<f64>> = frame_kernel
        .basis()
        .iter()
        .map(|v| nalgebra::DVector::from_vec(model.from_frame(v.as_slice())))
        .collect();
    Ok(Subspace::canonical_from_columns(m, &cols))
}

/// Checks a basis and returns the level tuples `(<lambda_i, alpha_k>)_k` of every coordinate.
pub fn level_tuples(model: &WeightedModel, alphas: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    check_basis(model, alphas)?;
    let table: Vec<Vec<f64>> = alphas.iter().map(|a| model.levels(a)).collect::<Result<_>>()?;
    Ok((0..model.num_coords()).map(|i| table.iter().map(|row| row[i]).collect()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sets(comps: &[FixedComponent]) -> Vec<Vec<usize>> {
        comps.iter().map(|c| c.index_set.clone()).collect()
    }

    #[test]
    fn components_of_single_directions() {
        let m = WeightedModel::unit_square();
        let c = fixed_components(&m, &[1.0, 0.0]).unwrap();
        assert_eq!(sets(&c), vec![vec![1, 3], vec![0, 2]]);
        assert_eq!((c[0].level, c[1].level), (1.0, 0.0));
        assert_eq!(c[0].dim, 1);

        let c = fixed_components(&m, &[0.0, 0.0]).unwrap();
        assert_eq!(sets(&c), vec![vec![0, 1, 2, 3]]);
        assert_eq!(c[0].level, 0.0);

        let c = fixed_components(&m, &[1.0, 0.5]).unwrap();
        assert_eq!(sets(&c), vec![vec![3], vec![1], vec![2], vec![0]]);
        let levels: Vec<f64> = c.iter().map(|c| c.level).collect();
        assert_eq!(levels, vec![1.5, 1.0, 0.5, 0.0]);
    }

    #[test]
    fn joint_fixed_sets() {
        let m1 = WeightedModel::unit_square();
        assert_eq!(joint_partition(&m1), vec![vec![0], vec![1], vec![2], vec![3]]);

        let m2 = WeightedModel::repeated_weight();
        let comps = fixed_set_subalgebra(&m2);
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].index_set, vec![0, 1]);
        assert_eq!(comps[0].dim, 1);
        assert_eq!(comps[0].value, vec![1.0, 0.0]);
        assert_eq!(comps[1].index_set, vec![2]);

        let line = WeightedModel::new("M1/x", m1.weights().to_vec(), vec![vec![1.0, 0.0]]).unwrap();
        let comps = fixed_set_subalgebra(&line);
        let got: Vec<Vec<usize>> = comps.iter().map(|c| c.index_set.clone()).collect();
        assert_eq!(got, vec![vec![1, 3], vec![0, 2]]);
    }

    #[test]
    fn refinement_of_basis_partitions_is_joint_partition() {
        let m = WeightedModel::unit_square();
        let p1 = level_partition(&m, &[1.0, 0.0]).unwrap();
        let p2 = level_partition(&m, &[0.0, 1.0]).unwrap();
        assert_eq!(common_refinement(&[p1, p2], 4), joint_partition(&m));
    }

    #[test]
    fn stabilizers() {
        let m = WeightedModel::unit_square();
        let x = ProjPoint::new(vec![0.5; 4], 1e-13).unwrap();
        assert!(stabilizer_algebra(&m, &x).unwrap().is_zero());
        assert_eq!(stabilizer_algebra(&m, &ProjPoint::coordinate(4, 0)).unwrap().dim(), 2);
        let y = ProjPoint::new(vec![1.0, 0.0, 0.0, 1.0], 1e-13).unwrap();
        let s = stabilizer_algebra(&m, &y).unwrap();
        assert_eq!(s.dim(), 1);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let b = &s.basis()[0];
        assert!((b[0] - h).abs() < 1e-14 && (b[1] + h).abs() < 1e-14);
    }

    #[test]
    fn certificates() {
        let m1 = WeightedModel::unit_square();
        let chain = chain_direction(&m1, &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(chain.beta, vec![1.0, 0.5]);
        assert!(chain.certificate);
        assert!(!certify_direction(&m1, &[1.0, 1.0]).unwrap());

        let m2 = WeightedModel::repeated_weight();
        let g = generic_direction(&m2, 11).unwrap();
        assert!(g.certificate);
        assert_eq!(level_partition(&m2, &g.beta).unwrap(), vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn unstable_components() {
        let m = WeightedModel::unit_square();
        let x = ProjPoint::new(vec![0.5; 4], 1e-13).unwrap();
        assert_eq!(unstable_component(&m, &[1.0, 0.0], &x).unwrap().index_set, vec![1, 3]);
        let e2 = ProjPoint::coordinate(4, 2);
        assert_eq!(unstable_component(&m, &[1.0, 0.0], &e2).unwrap().index_set, vec![0, 2]);
        let y = ProjPoint::new(vec![1.0, 0.0, 1.0, 0.0], 1e-13).unwrap();
        assert_eq!(unstable_component(&m, &[1.0, 0.0], &y).unwrap().index_set, vec![0, 2]);
    }
}
