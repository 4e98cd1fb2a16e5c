//! Seeded verification campaigns and the random instance generators they use.
//!
//! Trial `k` of a campaign draws all of its randomness from
//! `rng::substream(seed, k)`, so reports do not depend on scheduling and the
//! trials run in parallel.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::numerics::{gradient_fd_check, integrate_flow, linearization_at, monotonicity_check, numeric_limit};
use crate::rng::{self, TrialRng};
use crate::spectral::{delta_threshold, kernel_jumps_at_threshold, perturbed_kernel_equality, SymMat, Threshold};
use crate::tol::Tolerances;
use crate::torus::{
    certify_direction, chain_direction, composed_limit, flow, flow_limit, level_tuples, model_chain_threshold,
    moment_polytope_check, orbit_hull_check, perturbed_limit, random_direction, ProjPoint, WeightedModel,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Campaign {
    Theorem1,
    Theorem2,
    LemmaLinearization,
    Convexity,
    Numerics,
}

impl Campaign {
    pub const ALL: [Campaign; 5] =
        [Self::Theorem1, Self::Theorem2, Self::LemmaLinearization, Self::Convexity, Self::Numerics];

    pub fn name(self) -> &'static str {
        match self {
            Self::Theorem1 => "theorem1",
            Self::Theorem2 => "theorem2",
            Self::LemmaLinearization => "lemma-linearization",
            Self::Convexity => "convexity",
            Self::Numerics => "numerics",
        }
    }
}

impl fmt::Display for Campaign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Campaign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| Error::UnknownCampaign(s.to_string()))
    }
}

#[derive(Debug, Clone)]
pub struct CampaignConfig {
    pub model_path: PathBuf,
    pub campaign: Campaign,
    pub trials: usize,
    pub seed: u64,
    /// Overrides applied on top of [`Tolerances::from_env`].
    pub tolerances: BTreeMap<String, f64>,
    pub output_path: Option<PathBuf>,
    /// `theorem2` only: use `eps = delta` on points built from threshold-attaining pairs.
    pub probe_tightness: bool,
}

impl CampaignConfig {
    pub fn new(model_path: impl Into<PathBuf>, campaign: Campaign, trials: usize, seed: u64) -> Self {
        Self {
            model_path: model_path.into(),
            campaign,
            trials,
            seed,
            tolerances: BTreeMap::new(),
            output_path: None,
            probe_tightness: false,
        }
    }

    pub fn resolved_tolerances(&self) -> Result<Tolerances> {
        let mut tol = Tolerances::from_env()?;
        for (k, v) in &self.tolerances {
            tol.set(k, *v)?;
        }
        Ok(tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub seed: u64,
    pub trial_index: usize,
    pub inputs: Value,
    pub expected: Value,
    pub actual: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub campaign: String,
    pub model: String,
    pub trials: usize,
    pub passes: usize,
    pub failures: Vec<Failure>,
    pub thresholds_used: BTreeMap<String, Value>,
    pub wall_time: f64,
}

impl VerificationReport {
    pub fn success(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// The JSON report with `wall_time` zeroed, for reproducibility comparisons.
    pub fn to_json_without_time(&self) -> String {
        Self { wall_time: 0.0, ..self.clone() }.to_json()
    }
}

/// What a failed trial saw: `(inputs, expected, actual)`.
struct Mismatch {
    inputs: Value,
    expected: Value,
    actual: Value,
}

type TrialOutcome = std::result::Result<(), Mismatch>;

fn mismatch(inputs: Value, expected: Value, actual: Value) -> TrialOutcome {
    Err(Mismatch { inputs, expected, actual })
}

fn threshold_json(t: Threshold) -> Value {
    t.finite().map_or_else(|| json!("inf"), |v| json!(v))
}

/// Runs a campaign on the model at `config.model_path` and writes the JSON
/// report to `config.output_path` if set.
pub fn run_campaign(config: &CampaignConfig) -> Result<VerificationReport> {
    let tol = config.resolved_tolerances()?;
    let mut model = WeightedModel::load(&config.model_path)?;
    model.set_tolerances(tol);
    let report = run_on_model(&model, config)?;
    if let Some(out) = &config.output_path {
        write_report(&report, out)?;
    }
    Ok(report)
}

pub fn write_report(report: &VerificationReport, path: &Path) -> Result<()> {
    std::fs::write(path, report.to_json() + "\n")?;
    Ok(())
}

/// Runs a campaign on an already loaded model; tolerances come from the model.
pub fn run_on_model(model: &WeightedModel, config: &CampaignConfig) -> Result<VerificationReport> {
    if config.trials == 0 {
        return Err(Error::Argument("trials must be at least 1".into()));
    }
    let start = Instant::now();
    let mut thresholds: BTreeMap<String, Value> =
        model.tolerances().as_map().into_iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
    let setup = Setup::new(model, config, &mut thresholds)?;

    let outcomes: Vec<std::result::Result<TrialOutcome, Error>> = (0..config.trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng::substream(config.seed, k as u64);
            setup.trial(model, config.campaign, &mut rng)
        })
        .collect();

    let mut failures = Vec::new();
    for (k, outcome) in outcomes.into_iter().enumerate() {
        let failed = match outcome {
            Ok(Ok(())) => None,
            Ok(Err(m)) => Some(m),
            Err(e) => Some(Mismatch { inputs: Value::Null, expected: json!("no error"), actual: json!({"error": e.to_string()}) }),
        };
        if let Some(m) = failed {
            failures.push(Failure {
                seed: config.seed,
                trial_index: k,
                inputs: m.inputs,
                expected: m.expected,
                actual: m.actual,
            });
        }
    }
    Ok(VerificationReport {
        campaign: config.campaign.name().to_string(),
        model: model.name().to_string(),
        trials: config.trials,
        passes: config.trials - failures.len(),
        failures,
        thresholds_used: thresholds,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Number of random `eps` values tried per commuting pair.
pub const EPS_PER_PAIR: usize = 10;
/// Samples are drawn from `(0, delta (1 - EPS_MARGIN))`.
pub const EPS_MARGIN: f64 = 1e-9;
/// Minimum top-level gap of numerics instances, relative to `max(1, max|level|)`.
pub const MIN_RELATIVE_GAP: f64 = 0.05;
/// Minimum observed RK4 order, fitted over three successive halvings.
pub const RK4_MIN_ORDER: f64 = 3.8;
/// Horizon of the order check, times the level spread.
pub const RK4_SPAN: f64 = 2.0;
/// Coarsest RK4 step of the order check, times the level spread.
pub const RK4_STEP: f64 = 0.025;
/// Errors below this are roundoff and left out of the order fit.
pub const RK4_ERROR_FLOOR: f64 = 1e-12;
/// Accepted range for the finite-difference residual ratio under step halving.
pub const FD_RATIO_RANGE: (f64, f64) = (3.5, 4.5);
/// Tolerance on linearization eigenvalues.
pub const EIGEN_TOL: f64 = 1e-6;
/// Tolerance on snapped numeric limits.
pub const LIMIT_MATCH_TOL: f64 = 1e-9;

/// Campaign data that does not depend on the trial.
struct Setup {
    alphas: Vec<Vec<f64>>,
    /// Chain threshold for the stored basis, or the reason it does not exist.
    chain: std::result::Result<Threshold, String>,
    probe: bool,
    probe_pairs: Vec<(usize, usize)>,
}

impl Setup {
    fn new(model: &WeightedModel, config: &CampaignConfig, thresholds: &mut BTreeMap<String, Value>) -> Result<Self> {
        let alphas = model.subalgebra().to_vec();
        let chain = match model_chain_threshold(model, &alphas) {
            Ok(t) => Ok(t),
            Err(Error::NoUniformThreshold { reason }) => Err(reason),
            Err(e) => return Err(e),
        };
        let mut probe_pairs = Vec::new();
        match config.campaign {
            Campaign::Theorem1 | Campaign::Theorem2 => {
                thresholds.insert(
                    "chain_threshold".into(),
                    chain.as_ref().map_or_else(|_| json!("none"), |t| threshold_json(*t)),
                );
                if config.campaign == Campaign::Theorem2 && config.probe_tightness {
                    probe_pairs = attaining_pairs(model, &alphas)?;
                    thresholds.insert("probe_eps".into(), json!("chain_threshold"));
                }
            }
            Campaign::LemmaLinearization => {
                thresholds.insert("eps_per_pair".into(), json!(EPS_PER_PAIR));
                thresholds.insert("eps_margin".into(), json!(EPS_MARGIN));
                thresholds.insert("subspace_match_tol".into(), json!(crate::spectral::SUBSPACE_MATCH_TOL));
            }
            Campaign::Convexity => {}
            Campaign::Numerics => {
                thresholds.insert("min_relative_gap".into(), json!(MIN_RELATIVE_GAP));
                thresholds.insert("rk4_min_order".into(), json!(RK4_MIN_ORDER));
                thresholds.insert("fd_ratio_min".into(), json!(FD_RATIO_RANGE.0));
                thresholds.insert("fd_ratio_max".into(), json!(FD_RATIO_RANGE.1));
                thresholds.insert("eigen_tol".into(), json!(EIGEN_TOL));
                thresholds.insert("limit_match_tol".into(), json!(LIMIT_MATCH_TOL));
            }
        }
        Ok(Self { alphas, chain, probe: config.probe_tightness, probe_pairs })
    }

    fn trial(&self, model: &WeightedModel, campaign: Campaign, rng: &mut TrialRng) -> Result<TrialOutcome> {
        match campaign {
            Campaign::Theorem1 => self.theorem1(model, rng),
            Campaign::Theorem2 => self.theorem2(model, rng),
            Campaign::LemmaLinearization => lemma_trial(model.tolerances(), rng),
            Campaign::Convexity => convexity_trial(model, rng),
            Campaign::Numerics => numerics_trial(model, rng),
        }
    }

    fn theorem1(&self, model: &WeightedModel, rng: &mut TrialRng) -> Result<TrialOutcome> {
        let beta = random_direction(model, rng);
        if !certify_direction(model, &beta)? {
            return Ok(mismatch(json!({"beta": beta}), json!({"certified": true}), json!({"certified": false})));
        }
        match &self.chain {
            Ok(_) => {
                let det = chain_direction(model, &self.alphas)?;
                if !det.certificate {
                    return Ok(mismatch(
                        json!({"chain_direction": det.beta}),
                        json!({"certified": true}),
                        json!({"certified": false}),
                    ));
                }
            }
            Err(reason) => {
                return Ok(mismatch(
                    json!({"alphas": self.alphas}),
                    json!("uniform chain threshold"),
                    json!({"error": reason}),
                ))
            }
        }
        Ok(Ok(()))
    }

    fn theorem2(&self, model: &WeightedModel, rng: &mut TrialRng) -> Result<TrialOutcome> {
        let delta = match &self.chain {
            Ok(t) => *t,
            Err(reason) => {
                return Ok(mismatch(
                    json!({"alphas": self.alphas}),
                    json!("uniform chain threshold"),
                    json!({"error": reason}),
                ))
            }
        };
        let n = model.num_coords();
        let k = self.alphas.len() - 1;
        let (eps, coords) = if self.probe && !self.probe_pairs.is_empty() {
            let (i, j) = self.probe_pairs[rng.random_range(0..self.probe_pairs.len())];
            let mut c = vec![0.0; n];
            c[i] = 1.0;
            c[j] = 1.0;
            (vec![delta.value(); k], c)
        } else {
            let upper = delta.finite().unwrap_or(10.0);
            let eps = (0..k).map(|_| upper * open_unit(rng)).collect();
            let coords = if rng.random_bool(0.5) { rng::unit_vector(rng, n) } else { rng::sparse_vector(rng, n, 0.4) };
            (eps, coords)
        };
        let x = ProjPoint::new(coords, model.tolerances().supp_tol)?;
        let perturbed = perturbed_limit(model, &self.alphas, &eps, &x)?;
        let composed = composed_limit(model, &self.alphas, &x)?;
        if perturbed != composed {
            return Ok(mismatch(
                json!({"alphas": self.alphas, "eps": eps, "point": x.coords()}),
                json!(composed.coords()),
                json!(perturbed.coords()),
            ));
        }
        Ok(Ok(()))
    }
}

/// Uniform in the open interval `(0, 1)`.
fn open_unit(rng: &mut TrialRng) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// Coordinate pairs attaining the chain threshold of `alphas`.
/// Least-squares slope of `(ln dt, ln error)` pairs.
fn log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let cov: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    cov / points.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>()
}

pub fn attaining_pairs(model: &WeightedModel, alphas: &[Vec<f64>]) -> Result<Vec<(usize, usize)>> {
    let delta = match model_chain_threshold(model, alphas)?.finite() {
        Some(d) => d,
        None => return Ok(Vec::new()),
    };
    let tuples = level_tuples(model, alphas)?;
    let tols: Vec<f64> = (0..alphas.len())
        .map(|k| model.level_tol(&tuples.iter().map(|t| t[k]).collect::<Vec<_>>()))
        .collect();
    let n = model.num_coords();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let d: Vec<f64> = tuples[i].iter().zip(&tuples[j]).map(|(a, b)| a - b).collect();
            if d[0].abs() <= tols[0] {
                continue;
            }
            let rest: f64 = (1..d.len()).filter(|&k| d[k].abs() > tols[k]).map(|k| d[k].abs()).sum();
            if rest > 0.0 && d[0].abs() / rest <= delta * (1.0 + 1e-12) {
                pairs.push((i, j));
            }
        }
    }
    Ok(pairs)
}

/// A commuting pair `Q diag(a) Q^T`, `Q diag(b) Q^T` with `Q` a random
/// orthogonal matrix of size at most `max_dim`, and integer levels in
/// `[-5, 5]`, each zero with probability `0.3`.
pub fn random_commuting_pair<R: Rng + ?Sized>(rng: &mut R, max_dim: usize) -> (SymMat, SymMat) {
    let n = rng.random_range(1..=max_dim);
    let g = DMatrix::<f64>::from_fn(n, n, |_, _| StandardNormal.sample(rng));
    let q = g.qr().q();
    let level = |rng: &mut R| -> f64 {
        if rng.random_bool(0.3) {
            0.0
        } else {
            let v = rng.random_range(1..=5) as f64;
            if rng.random_bool(0.5) { v } else { -v }
        }
    };
    let a: Vec<f64> = (0..n).map(|_| level(rng)).collect();
    let b: Vec<f64> = (0..n).map(|_| level(rng)).collect();
    (
        SymMat::from_spectrum(&q, &a).expect("orthogonal basis"),
        SymMat::from_spectrum(&q, &b).expect("orthogonal basis"),
    )
}

fn lemma_trial(tol: &Tolerances, rng: &mut TrialRng) -> Result<TrialOutcome> {
    let (alpha, beta) = random_commuting_pair(rng, 12);
    let ktol = tol.kernel_rel * alpha.max_abs().max(beta.max_abs());
    let delta = delta_threshold(&alpha, &beta, ktol)?;
    let upper = delta.finite().map_or(10.0, |d| d * (1.0 - EPS_MARGIN));
    let inputs = |eps: Value| json!({"alpha": alpha.to_rows(), "beta": beta.to_rows(), "eps": eps});
    for _ in 0..EPS_PER_PAIR {
        let eps = upper * open_unit(rng);
        let report = perturbed_kernel_equality(&alpha, &beta, eps, ktol)?;
        if !report.holds {
            return Ok(mismatch(
                inputs(json!(eps)),
                json!({"kernel_equality": true}),
                serde_json::to_value(&report)?,
            ));
        }
    }
    if let Some((delta, true)) = kernel_jumps_at_threshold(&alpha, &beta, ktol)? {
        let report = perturbed_kernel_equality(&alpha, &beta, delta.value(), ktol)?;
        if report.perturbed_dim <= report.joint_dim {
            return Ok(mismatch(
                inputs(json!(delta.value())),
                json!({"kernel_jump": true}),
                serde_json::to_value(&report)?,
            ));
        }
    }
    Ok(Ok(()))
}

fn random_point(model: &WeightedModel, rng: &mut TrialRng) -> Result<ProjPoint> {
    let n = model.num_coords();
    let coords = if rng.random_bool(0.5) { rng::unit_vector(rng, n) } else { rng::sparse_vector(rng, n, 0.5) };
    ProjPoint::new(coords, model.tolerances().supp_tol)
}

fn convexity_trial(model: &WeightedModel, rng: &mut TrialRng) -> Result<TrialOutcome> {
    let seed: u64 = rng.random();
    let poly = moment_polytope_check(model, 16, seed);
    if !poly.holds {
        return Ok(mismatch(json!({"sample_seed": seed}), json!({"polytope_holds": true}), serde_json::to_value(&poly)?));
    }
    let x = random_point(model, rng)?;
    let orbit = orbit_hull_check(model, &x, 16, seed);
    if !orbit.holds {
        return Ok(mismatch(
            json!({"sample_seed": seed, "point": x.coords()}),
            json!({"orbit_hull_holds": true}),
            serde_json::to_value(&orbit)?,
        ));
    }
    Ok(Ok(()))
}

/// A direction and a point whose top support level is separated from the
/// next one by at least `MIN_RELATIVE_GAP * max(1, max|level|)`.
pub fn gapped_instance(model: &WeightedModel, rng: &mut TrialRng) -> Result<(Vec<f64>, ProjPoint)> {
    for _ in 0..crate::torus::MAX_DIRECTION_DRAWS {
        let beta = random_direction(model, rng);
        let x = random_point(model, rng)?;
        let levels = model.levels(&beta)?;
        let tol = model.level_tol(&levels);
        let support: Vec<f64> = x.support().iter().map(|&i| levels[i]).collect();
        let top = support.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let next = support.iter().copied().filter(|&l| l < top - tol).fold(f64::NEG_INFINITY, f64::max);
        let scale = levels.iter().fold(1.0f64, |m, l| m.max(l.abs()));
        if top - next >= MIN_RELATIVE_GAP * scale {
            return Ok((beta, x));
        }
    }
    Err(Error::ExhaustedRetries(crate::torus::MAX_DIRECTION_DRAWS))
}

fn numerics_trial(model: &WeightedModel, rng: &mut TrialRng) -> Result<TrialOutcome> {
    let tol = model.tolerances();
    let (beta, x) = gapped_instance(model, rng)?;
    let inputs = json!({"beta": beta, "point": x.coords()});

    let exact = flow_limit(model, &beta, &x)?;
    let numeric = numeric_limit(model, &beta, &x, tol.fix_tol)?;
    if !numeric.point.same_point(&exact, LIMIT_MATCH_TOL) {
        return Ok(mismatch(inputs, json!({"limit": exact.coords()}), json!({"limit": numeric.point.coords()})));
    }

    let levels = model.levels(&beta)?;
    let hi = levels.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = levels.iter().cloned().fold(f64::INFINITY, f64::min);
    if hi > lo {
        // the flow only sees level differences: run a fixed span in units of the spread
        let horizon = RK4_SPAN / (hi - lo);
        let steps = (RK4_SPAN / RK4_STEP).round();
        let target = flow(model, &beta, horizon, &x)?;
        let mut fit = Vec::new();
        let mut errors = Vec::new();
        for k in 0..3 {
            let dt = horizon / (steps * f64::from(1 << k));
            let e = integrate_flow(model, &beta, &x, horizon, dt)?.last().distance(&target);
            errors.push(e);
            if e > RK4_ERROR_FLOOR {
                fit.push((dt.ln(), e.ln()));
            }
        }
        if fit.len() >= 2 {
            let order = log_slope(&fit);
            if order < RK4_MIN_ORDER {
                return Ok(mismatch(
                    inputs,
                    json!({"rk4_min_order": RK4_MIN_ORDER}),
                    json!({"errors": errors, "order": order}),
                ));
            }
        }
    }

    let y = random_point(model, rng)?;
    let r1 = gradient_fd_check(model, &beta, &y, 1e-2)?;
    let r2 = gradient_fd_check(model, &beta, &y, 5e-3)?;
    if r1 > 1e-11 && !(FD_RATIO_RANGE.0..=FD_RATIO_RANGE.1).contains(&(r1 / r2)) {
        return Ok(mismatch(
            json!({"beta": beta, "point": y.coords()}),
            json!({"fd_ratio": FD_RATIO_RANGE}),
            json!({"residuals": [r1, r2]}),
        ));
    }

    let j = rng.random_range(0..model.num_coords());
    let ej = ProjPoint::coordinate(model.num_coords(), j);
    let lin = linearization_at(model, &beta, &ej, 1e-6)?;
    let mut want: Vec<f64> = (0..levels.len()).filter(|&i| i != j).map(|i| levels[i] - levels[j]).collect();
    want.sort_by(f64::total_cmp);
    let err = lin.eigenvalues.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if err > EIGEN_TOL {
        return Ok(mismatch(
            json!({"beta": beta, "coordinate": j}),
            json!({"eigenvalues": want}),
            json!({"eigenvalues": lin.eigenvalues}),
        ));
    }

    let traj = integrate_flow(model, &beta, &x, 5.0, 1e-2)?;
    if !monotonicity_check(model, &traj)? {
        return Ok(mismatch(inputs, json!({"monotone": true}), json!({"monotone": false})));
    }
    Ok(Ok(()))
}

/// A random model with `2..=max_coords` coordinates, torus dimension
/// `1..=max_torus`, integer weights in `[-3, 3]` and a subalgebra spanned by
/// Gaussian vectors.
pub fn random_model<R: Rng + ?Sized>(rng: &mut R, name: &str, max_coords: usize, max_torus: usize) -> WeightedModel {
    loop {
        let n = rng.random_range(2..=max_coords);
        let m = rng.random_range(1..=max_torus);
        let d = rng.random_range(1..=m);
        let weights: Vec<Vec<f64>> =
            (0..n).map(|_| (0..m).map(|_| rng.random_range(-3i32..=3) as f64).collect()).collect();
        let basis: Vec<Vec<f64>> = (0..d).map(|_| (0..m).map(|_| StandardNormal.sample(rng)).collect()).collect();
        if let Ok(model) = WeightedModel::new(name, weights, basis) {
            return model;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(c: Campaign, trials: usize) -> CampaignConfig {
        CampaignConfig::new("unused", c, trials, 42)
    }

    #[test]
    fn campaign_names_round_trip() {
        for c in Campaign::ALL {
            assert_eq!(c.name().parse::<Campaign>().unwrap(), c);
        }
        assert!(matches!("theorem3".parse::<Campaign>(), Err(Error::UnknownCampaign(_))));
    }

    #[test]
    fn perturbed_campaign_on_the_square() {
        let m1 = WeightedModel::unit_square();
        let r = run_on_model(&m1, &config(Campaign::Theorem2, 200)).unwrap();
        assert_eq!((r.passes, r.failures.len()), (200, 0));
        let mut probe = config(Campaign::Theorem2, 20);
        probe.probe_tightness = true;
        let r = run_on_model(&m1, &probe).unwrap();
        assert!(!r.failures.is_empty());
        assert_eq!(r.passes + r.failures.len(), 20);
    }

    #[test]
    fn single_trials_account() {
        let m1 = WeightedModel::unit_square();
        for c in Campaign::ALL {
            let r = run_on_model(&m1, &config(c, 1)).unwrap();
            assert_eq!(r.passes + r.failures.len(), 1);
            assert!(r.success(), "{c}: {:?}", r.failures);
        }
    }

    #[test]
    fn reports_are_reproducible() {
        let m2 = WeightedModel::repeated_weight();
        for c in Campaign::ALL {
            let a = run_on_model(&m2, &config(c, 8)).unwrap();
            let b = run_on_model(&m2, &config(c, 8)).unwrap();
            assert_eq!(a.to_json_without_time(), b.to_json_without_time());
        }
    }

    #[test]
    fn generators_respect_their_ranges() {
        let mut rng = rng::substream(5, 0);
        for _ in 0..50 {
            let (a, b) = random_commuting_pair(&mut rng, 12);
            assert!(a.dim() <= 12);
            assert!(crate::spectral::commutator_norm(&a, &b).unwrap() < 1e-10 * 25.0 * a.dim() as f64);
            let m = random_model(&mut rng, "r", 10, 4);
            assert!(m.num_coords() <= 10 && m.torus_dim() <= 4);
            assert!(m.weights().iter().flatten().all(|w| w.fract() == 0.0 && w.abs() <= 3.0));
        }
    }

    #[test]
    fn probe_pairs_of_the_square() {
        let m1 = WeightedModel::unit_square();
        assert_eq!(attaining_pairs(&m1, m1.subalgebra()).unwrap(), vec![(0, 3), (1, 2)]);
    }
}
