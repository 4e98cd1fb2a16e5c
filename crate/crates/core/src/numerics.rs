//! Numerical counterparts of the closed-form flow results.
//!
//! The gradient flow `x' = Bx - <x, Bx> x` is integrated with classical RK4
//! followed by renormalization onto the sphere. Nothing here uses the
//! closed-form flow, so agreement with [`crate::torus::flow`] is a genuine
//! cross-check.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::torus::{field_from_levels, fixed_components, ProjPoint, WeightedModel};

pub const DEFAULT_DT: f64 = 1e-2;
pub const DEFAULT_T_MAX: f64 = 1e4;

/// Largest relative norm change tolerated when renormalizing after a step.
pub const MAX_RENORM_CORRECTION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<ProjPoint>,
    pub beta: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> &ProjPoint {
        self.points.last().expect("trajectories are nonempty")
    }

    /// `<mu_a, beta>` at every sample.
    pub fn mu_values(&self, model: &WeightedModel) -> Result<Vec<f64>> {
        let levels = model.levels(&self.beta)?;
        Ok(self.points.iter().map(|p| weighted_square_sum(&levels, p.coords())).collect())
    }

    /// Writes `t, x_0, ..., x_n, mu_beta, field_norm` rows.
    pub fn write_csv<W: Write>(&self, model: &WeightedModel, out: W) -> Result<()> {
        let levels = model.levels(&self.beta)?;
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend((0..model.num_coords()).map(|i| format!("x_{i}")));
        header.extend(["mu_beta".to_string(), "field_norm".to_string()]);
        w.write_record(&header)?;
        for (t, p) in self.times.iter().zip(&self.points) {
            let mut row = vec![t.to_string()];
            row.extend(p.coords().iter().map(|v| v.to_string()));
            row.push(weighted_square_sum(&levels, p.coords()).to_string());
            row.push(norm(&field_from_levels(&levels, p.coords())).to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn weighted_square_sum(levels: &[f64], x: &[f64]) -> f64 {
    x.iter().zip(levels).map(|(xi, b)| xi * xi * b).sum()
}

fn axpy(x: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    x.iter().zip(k).map(|(a, b)| a + h * b).collect()
}

/// One RK4 step followed by renormalization.
fn rk4_step(levels: &[f64], x: &[f64], dt: f64) -> Result<Vec<f64>> {
    let k1 = field_from_levels(levels, x);
    let k2 = field_from_levels(levels, &axpy(x, 0.5 * dt, &k1));
    let k3 = field_from_levels(levels, &axpy(x, 0.5 * dt, &k2));
    let k4 = field_from_levels(levels, &axpy(x, dt, &k3));
    let y: Vec<f64> = (0..x.len()).map(|i| x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect();
    let n = norm(&y);
    if !n.is_finite() || (n - 1.0).abs() > MAX_RENORM_CORRECTION {
        return Err(Error::StepTooLarge(dt));
    }
    Ok(y.into_iter().map(|v| v / n).collect())
}

/// Integrates `raw` over `[0, span]`, calling `visit` after every step.
fn integrate_raw(
    levels: &[f64],
    raw: &mut Vec<f64>,
    span: f64,
    dt: f64,
    mut visit: impl FnMut(f64, &[f64]),
) -> Result<()> {
    let steps = (span / dt).ceil() as usize;
    let mut t = 0.0;
    for k in 0..steps {
        let h = if k + 1 == steps { span - t } else { dt };
        *raw = rk4_step(levels, raw, h)?;
        t = if k + 1 == steps { span } else { t + h };
        visit(t, raw);
    }
    Ok(())
}

fn check_step(dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Argument(format!("step must be positive, got {dt}")));
    }
    Ok(())
}

/// RK4 trajectory of `x' = beta_X(x)` from `x0` up to `t_end`.
///
/// The last step is shortened so the trajectory ends exactly at `t_end`.
pub fn integrate_flow(model: &WeightedModel, beta: &[f64], x0: &ProjPoint, t_end: f64, dt: f64) -> Result<Trajectory> {
    check_step(dt)?;
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::Argument(format!("end time must be finite and nonnegative, got {t_end}")));
    }
    if x0.len() != model.num_coords() {
        return Err(Error::DimensionMismatch { expected: model.num_coords(), actual: x0.len() });
    }
    let levels = model.levels(beta)?;
    let supp_tol = model.tolerances().supp_tol;
    let mut times = vec![0.0];
    let mut points = vec![x0.clone()];
    let mut raw = x0.coords().to_vec();
    integrate_raw(&levels, &mut raw, t_end, dt, |t, x| {
        times.push(t);
        points.push(ProjPoint::new(x.to_vec(), supp_tol).expect("unit vector"));
    })?;
    Ok(Trajectory { times, points, beta: beta.to_vec() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitOptions {
    /// Stop once `|beta_X(x(t))| < tol`.
    pub tol: f64,
    pub dt: f64,
    pub t_max: f64,
}

impl Default for LimitOptions {
    fn default() -> Self {
        Self { tol: 1e-10, dt: DEFAULT_DT, t_max: DEFAULT_T_MAX }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumericLimit {
    /// The terminal point projected onto the identified component of `X^beta`.
    pub point: ProjPoint,
    /// The terminal point of the integration.
    pub raw: ProjPoint,
    /// Index set of the identified component.
    pub component: Vec<usize>,
    pub time: f64,
    pub residual: f64,
}

/// Flow limit by integration with default step and horizon.
pub fn numeric_limit(model: &WeightedModel, beta: &[f64], x0: &ProjPoint, tol: f64) -> Result<NumericLimit> {
    numeric_limit_with(model, beta, x0, &LimitOptions { tol, ..LimitOptions::default() })
}

/// Integrates over horizons `1, 2, 4, ...` until the field norm drops below
/// `opts.tol`, then snaps to the component of `X^beta` carrying most of the
/// terminal point's mass.
pub fn numeric_limit_with(
    model: &WeightedModel,
    beta: &[f64],
    x0: &ProjPoint,
    opts: &LimitOptions,
) -> Result<NumericLimit> {
    check_step(opts.dt)?;
    if !(opts.tol > 0.0) {
        return Err(Error::Argument(format!("tolerance must be positive, got {}", opts.tol)));
    }
    if x0.len() != model.num_coords() {
        return Err(Error::DimensionMismatch { expected: model.num_coords(), actual: x0.len() });
    }
    let levels = model.levels(beta)?;
    let supp_tol = model.tolerances().supp_tol;
    let mut raw = x0.coords().to_vec();
    let mut time = 0.0;
    let mut horizon = 1.0f64;
    let mut residual = norm(&field_from_levels(&levels, &raw));
    while residual >= opts.tol {
        if time >= opts.t_max {
            return Err(Error::HorizonExceeded { t_max: opts.t_max, residual });
        }
        let span = horizon.min(opts.t_max - time);
        integrate_raw(&levels, &mut raw, span, opts.dt, |_, _| {})?;
        time += span;
        horizon *= 2.0;
        residual = norm(&field_from_levels(&levels, &raw));
    }

    let comps = fixed_components(model, beta)?;
    let mass = |set: &[usize]| set.iter().map(|&i| raw[i] * raw[i]).sum::<f64>();
    let component = comps
        .iter()
        .map(|c| c.index_set.clone())
        .max_by(|a, b| mass(a).total_cmp(&mass(b)))
        .expect("at least one component");
    let mut snapped = vec![0.0; raw.len()];
    for &i in &component {
        snapped[i] = raw[i];
    }
    Ok(NumericLimit {
        point: ProjPoint::new(snapped, supp_tol)?,
        raw: ProjPoint::new(raw, supp_tol)?,
        component,
        time,
        residual,
    })
}

/// Orthonormal basis of the tangent space `x^perp`, by Gram-Schmidt on the
/// coordinate directions in index order.
pub fn tangent_frame(x: &[f64]) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    for i in 0..n {
        if frame.len() + 1 == n {
            break;
        }
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        for _ in 0..2 {
            for f in std::iter::once(x).chain(frame.iter().map(|f| f.as_slice())) {
                let c: f64 = f.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(f).for_each(|(a, b)| *a -= c * b);
            }
        }
        let len = norm(&v);
        if len > 1e-8 {
            frame.push(v.into_iter().map(|a| a / len).collect());
        }
    }
    frame
}

/// Distance between a finite-difference gradient of `<mu_a, beta>` and `beta_X(x)`.
///
/// Directional derivatives are central differences along the great circles
/// `cos(h) x ± sin(h) u`. They give the round-metric gradient, which is halved
/// because the metric is twice the round one.
pub fn gradient_fd_check(model: &WeightedModel, beta: &[f64], x: &ProjPoint, h: f64) -> Result<f64> {
    check_step(h)?;
    if x.len() != model.num_coords() {
        return Err(Error::DimensionMismatch { expected: model.num_coords(), actual: x.len() });
    }
    let levels = model.levels(beta)?;
    let xc = x.coords();
    let (c, s) = (h.cos(), h.sin());
    let mut grad = vec![0.0; xc.len()];
    for u in tangent_frame(xc) {
        let plus: Vec<f64> = xc.iter().zip(&u).map(|(a, b)| c * a + s * b).collect();
        let minus: Vec<f64> = xc.iter().zip(&u).map(|(a, b)| c * a - s * b).collect();
        let deriv = (weighted_square_sum(&levels, &plus) - weighted_square_sum(&levels, &minus)) / (2.0 * h);
        grad.iter_mut().zip(&u).for_each(|(g, v)| *g += 0.5 * deriv * v);
    }
    let field = field_from_levels(&levels, xc);
    Ok(norm(&grad.iter().zip(&field).map(|(a, b)| a - b).collect::<Vec<_>>()))
}

/// True iff `<mu_a, beta>` never decreases by more than `mono_tol` along the
/// trajectory, and increases strictly on every step whose predicted increment
/// `dt |beta_X|^2` exceeds `mono_tol` at a point with `|beta_X| > fix_tol`.
pub fn monotonicity_check(model: &WeightedModel, traj: &Trajectory) -> Result<bool> {
    let tol = model.tolerances();
    let levels = model.levels(&traj.beta)?;
    let mu = traj.mu_values(model)?;
    for k in 1..traj.len() {
        let step = mu[k] - mu[k - 1];
        if step < -tol.mono_tol {
            return Ok(false);
        }
        let field = norm(&field_from_levels(&levels, traj.points[k - 1].coords()));
        let dt = traj.times[k] - traj.times[k - 1];
        if field > tol.fix_tol && dt * field * field > tol.mono_tol && step <= 0.0 {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Linearization {
    pub base: ProjPoint,
    /// The differential of `beta_X` in the tangent frame at `base`.
    #[serde(serialize_with = "serialize_matrix")]
    pub matrix: DMatrix<f64>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
}

fn serialize_matrix<S: serde::Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
    rows.serialize(s)
}

/// Finite-difference differential of `beta_X` at a zero `x`.
///
/// At a zero the differential does not depend on a connection, so the
/// Jacobian is taken in the chart `v -> (x + v) / |x + v|` and read off in
/// the tangent frame of [`tangent_frame`].
pub fn linearization_at(model: &WeightedModel, beta: &[f64], x: &ProjPoint, h: f64) -> Result<Linearization> {
    check_step(h)?;
    if x.len() != model.num_coords() {
        return Err(Error::DimensionMismatch { expected: model.num_coords(), actual: x.len() });
    }
    let levels = model.levels(beta)?;
    let xc = x.coords();
    let residual = norm(&field_from_levels(&levels, xc));
    if residual > model.tolerances().fix_tol {
        return Err(Error::NotAFixedPoint(residual));
    }
    let frame = tangent_frame(xc);
    let k = frame.len();
    let chart = |u: &[f64], sign: f64| -> Vec<f64> {
        let y: Vec<f64> = xc.iter().zip(u).map(|(a, b)| a + sign * h * b).collect();
        let n = norm(&y);
        field_from_levels(&levels, &y.into_iter().map(|v| v / n).collect::<Vec<_>>())
    };
    let mut jac = DMatrix::zeros(k, k);
    for (l, ul) in frame.iter().enumerate() {
        let plus = chart(ul, 1.0);
        let minus = chart(ul, -1.0);
        let col: Vec<f64> = plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * h)).collect();
        for (r, ur) in frame.iter().enumerate() {
            jac[(r, l)] = ur.iter().zip(&col).map(|(a, b)| a * b).sum::<f64>();
        }
    }
    let matrix = 0.5 * (&jac + jac.transpose());
    let mut eigenvalues: Vec<f64> = matrix.clone().symmetric_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    Ok(Linearization { base: x.clone(), matrix, eigenvalues })
}

impl Linearization {
    /// Eigenvectors of the differential as ambient tangent vectors, paired with
    /// their eigenvalues in ascending order.
    pub fn eigenvectors(&self) -> Vec<(f64, Vec<f64>)> {
        let frame = tangent_frame(self.base.coords());
        let eig = self.matrix.clone().symmetric_eigen();
        let mut pairs: Vec<(f64, Vec<f64>)> = (0..eig.eigenvalues.len())
            .map(|c| {
                let v: DVector<f64> = eig.eigenvectors.column(c).into_owned();
                let mut amb = vec![0.0; self.base.len()];
                for (f, w) in frame.iter().zip(v.iter()) {
                    amb.iter_mut().zip(f).for_each(|(a, b)| *a += w * b);
                }
                (eig.eigenvalues[c], amb)
            })
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{flow, flow_limit};

    fn m1() -> WeightedModel {
        WeightedModel::unit_square()
    }

    fn point(c: &[f64]) -> ProjPoint {
        ProjPoint::new(c.to_vec(), 1e-13).unwrap()
    }

    #[test]
    fn zero_horizon_and_fixed_start() {
        let x = point(&[0.5; 4]);
        let traj = integrate_flow(&m1(), &[1.0, 0.0], &x, 0.0, 0.01).unwrap();
        assert_eq!(traj.points, vec![x]);
        let e1 = ProjPoint::coordinate(4, 1);
        let traj = integrate_flow(&m1(), &[1.0, 0.0], &e1, 1.0, 0.01).unwrap();
        assert_eq!(traj.len(), 101);
        assert!(traj.points.iter().all(|p| p.distance(&e1) < 1e-12));
    }

    #[test]
    fn rk4_matches_closed_form() {
        let x = point(&[0.5; 4]);
        let traj = integrate_flow(&m1(), &[1.0, 0.0], &x, 10.0, 0.01).unwrap();
        let e = 10f64.exp();
        let expect = point(&[1.0, e, 1.0, e]);
        assert!(traj.last().distance(&expect) < 1e-6);
        assert!((traj.times.last().unwrap() - 10.0).abs() < 1e-15);
        assert!(monotonicity_check(&m1(), &traj).unwrap());
    }

    #[test]
    fn oversized_steps_are_rejected() {
        let x = point(&[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(
            integrate_flow(&m1(), &[50.0, 0.0], &x, 1.0, 0.5),
            Err(Error::StepTooLarge(_))
        ));
    }

    #[test]
    fn numeric_limits() {
        let x = point(&[0.5; 4]);
        let lim = numeric_limit(&m1(), &[1.0, 0.0], &x, 1e-10).unwrap();
        assert_eq!(lim.component, vec![1, 3]);
        assert!(lim.point.same_point(&point(&[0.0, 1.0, 0.0, 1.0]), 1e-12));
        let lim = numeric_limit(&m1(), &[1.0, 0.5], &x, 1e-10).unwrap();
        assert!(lim.point.same_point(&ProjPoint::coordinate(4, 3), 0.0));
        let e2 = ProjPoint::coordinate(4, 2);
        let lim = numeric_limit(&m1(), &[1.0, 0.0], &e2, 1e-10).unwrap();
        assert_eq!(lim.point, e2);
        assert_eq!(lim.time, 0.0);
    }

    #[test]
    fn horizon_is_enforced() {
        let x = point(&[0.5; 4]);
        let opts = LimitOptions { tol: 1e-10, dt: 0.01, t_max: 2.0 };
        assert!(matches!(
            numeric_limit_with(&m1(), &[1.0, 0.0], &x, &opts),
            Err(Error::HorizonExceeded { .. })
        ));
    }

    #[test]
    fn gradient_matches_field() {
        let x = point(&[0.5; 4]);
        assert!(gradient_fd_check(&m1(), &[1.0, 0.0], &x, 1e-5).unwrap() < 1e-8);
        assert!(gradient_fd_check(&m1(), &[0.0, 0.0], &x, 1e-5).unwrap() < 1e-15);
        let e0 = ProjPoint::coordinate(4, 0);
        assert!(gradient_fd_check(&m1(), &[1.0, 0.0], &e0, 1e-4).unwrap() <= 1e-8);
        let y = point(&[0.3, -0.5, 0.7, 0.2]);
        let r1 = gradient_fd_check(&m1(), &[1.0, 2.0], &y, 1e-2).unwrap();
        let r2 = gradient_fd_check(&m1(), &[1.0, 2.0], &y, 5e-3).unwrap();
        assert!((3.5..=4.5).contains(&(r1 / r2)), "{r1} {r2}");
    }

    #[test]
    fn monotonicity_negative_control() {
        let pts = vec![point(&[0.0, 1.0, 0.0, 1.0]), point(&[0.5; 4]), point(&[1.0, 0.0, 1.0, 0.0])];
        let traj = Trajectory { times: vec![0.0, 1.0, 2.0], points: pts, beta: vec![1.0, 0.0] };
        assert!(!monotonicity_check(&m1(), &traj).unwrap());
        let e0 = ProjPoint::coordinate(4, 0);
        let still = Trajectory { times: vec![0.0, 1.0], points: vec![e0.clone(), e0], beta: vec![1.0, 0.0] };
        assert!(monotonicity_check(&m1(), &still).unwrap());
    }

    #[test]
    fn linearization_at_coordinate_points() {
        let lin = linearization_at(&m1(), &[1.0, 0.0], &ProjPoint::coordinate(4, 1), 1e-6).unwrap();
        for (got, want) in lin.eigenvalues.iter().zip([-1.0, -1.0, 0.0]) {
            assert!((got - want).abs() < 1e-6, "{:?}", lin.eigenvalues);
        }
        let lin = linearization_at(&m1(), &[1.0, 0.5], &ProjPoint::coordinate(4, 3), 1e-6).unwrap();
        for (got, want) in lin.eigenvalues.iter().zip([-1.5, -1.0, -0.5]) {
            assert!((got - want).abs() < 1e-6);
        }
        let lin = linearization_at(&m1(), &[0.0, 0.0], &point(&[0.5; 4]), 1e-6).unwrap();
        assert!(lin.matrix.amax() < 1e-12);
        assert!(matches!(
            linearization_at(&m1(), &[1.0, 0.0], &point(&[0.5; 4]), 1e-6),
            Err(Error::NotAFixedPoint(_))
        ));
    }

    #[test]
    fn eigenvalue_signs_predict_the_flow() {
        // e_1 under (1, 0.5): levels (0, 1, 0.5, 1.5); e_3 is above, e_0 and e_2 below
        let beta = [1.0, 0.5];
        let e1 = ProjPoint::coordinate(4, 1);
        let lin = linearization_at(&m1(), &beta, &e1, 1e-6).unwrap();
        for (value, v) in lin.eigenvectors() {
            let y: Vec<f64> = e1.coords().iter().zip(&v).map(|(a, b)| a + 1e-3 * b).collect();
            let lim = numeric_limit(&m1(), &beta, &point(&y), 1e-10).unwrap();
            let stays = lim.point.same_point(&e1, 1e-9);
            assert_eq!(stays, value < 0.0, "eigenvalue {value}");
        }
    }

    #[test]
    fn csv_export() {
        let traj = integrate_flow(&m1(), &[1.0, 0.0], &point(&[0.5; 4]), 0.02, 0.01).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&m1(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,x_0,x_1,x_2,x_3,mu_beta,field_norm");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0,0.5,0.5,0.5,0.5,0.5,0.5"));
    }

    #[test]
    fn numeric_and_exact_flow_agree() {
        let x = point(&[0.3, -0.5, 0.7, 0.2]);
        let beta = [0.7, -1.3];
        let traj = integrate_flow(&m1(), &beta, &x, 3.0, 1e-3).unwrap();
        assert!(traj.last().distance(&flow(&m1(), &beta, 3.0, &x).unwrap()) < 1e-10);
        let lim = numeric_limit(&m1(), &beta, &x, 1e-10).unwrap();
        assert!(lim.point.same_point(&flow_limit(&m1(), &beta, &x).unwrap(), 1e-9));
    }
}
