mod common;

use gml::campaign::random_commuting_pair;
use gml::rng::substream;
use gml::spectral::*;
use gml::Error;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use common::{joint_nullity, perturbed_nullity};

const GE_REL: f64 = 1e-9;

fn family(seed: u64, members: usize) -> Vec<SymMat> {
    let mut rng = substream(seed, 99);
    let n = rng.random_range(1..=8);
    let g = DMatrix::<f64>::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
    let q = g.qr().q();
    (0..members)
        .map(|_| {
            let levels: Vec<f64> =
                (0..n).map(|_| if rng.random_bool(0.35) { 0.0 } else { rng.random_range(-4i32..=4) as f64 }).collect();
            SymMat::from_spectrum(&q, &levels).unwrap()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn joint_spectrum_reconstructs_the_family(seed in any::<u64>(), members in 1usize..4) {
        let fam = CommutingFamily::new(family(seed, members)).unwrap();
        let js = joint_diagonalize(&fam, 1e-8).unwrap();
        prop_assert!(js.orthonormality_defect() < 1e-10);
        prop_assert!(js.reconstruction_residual(&fam) < 1e-8);
    }

    #[test]
    fn kernels_below_the_threshold_match_elimination(seed in any::<u64>()) {
        let mut rng = substream(seed, 0);
        let (a, b) = random_commuting_pair(&mut rng, 12);
        let tol = default_kernel_tol(&[&a, &b]);
        let delta = delta_threshold(&a, &b, tol).unwrap();
        let joint = joint_nullity(&a, &b, GE_REL);
        let top = delta.finite().unwrap_or(8.0);
        for k in 1..16 {
            let eps = top * k as f64 / 16.0;
            prop_assert_eq!(perturbed_nullity(&a, &b, eps, GE_REL), joint, "eps = {}", eps);
            let report = perturbed_kernel_equality(&a, &b, eps, tol).unwrap();
            prop_assert!(report.holds);
            prop_assert_eq!(report.joint_dim, joint);
        }
    }

    #[test]
    fn opposite_signs_make_the_kernel_jump(seed in any::<u64>()) {
        let mut rng = substream(seed, 0);
        let (a, b) = random_commuting_pair(&mut rng, 12);
        let tol = default_kernel_tol(&[&a, &b]);
        if let Some((delta, opposite)) = kernel_jumps_at_threshold(&a, &b, tol).unwrap() {
            let jumped = perturbed_nullity(&a, &b, delta.value(), GE_REL) > joint_nullity(&a, &b, GE_REL);
            prop_assert_eq!(jumped, opposite);
        }
    }

    #[test]
    fn chain_threshold_is_uniform_or_refused(seed in any::<u64>()) {
        let members = family(seed, 3);
        let fam = CommutingFamily::new(members.clone()).unwrap();
        let mut stacked: Vec<Vec<f64>> = Vec::new();
        for m in &members {
            stacked.extend(m.to_rows());
        }
        let tol = common::ge_tol(&members.iter().collect::<Vec<_>>(), GE_REL);
        let joint = members[0].dim() - common::rank(&stacked, tol);
        let combo = |e2: f64, e3: f64| {
            let s = members[0].add_scaled(e2, &members[1]).unwrap().add_scaled(e3, &members[2]).unwrap();
            s.dim() - common::rank(&s.to_rows(), tol)
        };
        let mut rng = substream(seed, 1);
        match chain_threshold(&fam) {
            Ok(delta) => {
                let top = delta.finite().unwrap_or(8.0);
                for _ in 0..20 {
                    let (u, v): (f64, f64) = (rng.random(), rng.random());
                    let (e2, e3) = (top * u.max(1e-3) * 0.999, top * v.max(1e-3) * 0.999);
                    prop_assert_eq!(combo(e2, e3), joint, "eps = ({}, {})", e2, e3);
                }
            }
            Err(Error::NoUniformThreshold { .. }) => {
                // some joint eigenvector has levels (0, b, c) with b c < 0; for
                // every box there is a point where it enters the kernel
                let js = joint_diagonalize(&fam, 1e-8).unwrap();
                let witness = (0..js.dim()).map(|i| js.tuple(i)).find(|t| {
                    t[0].abs() < 1e-9 && t[1].abs() > 1e-9 && t[2].abs() > 1e-9 && t[1] * t[2] < 0.0
                });
                let t = witness.expect("a mixed-sign joint eigenvector");
                for scale in [1.0, 1e-2, 1e-4] {
                    let e2 = scale * t[2].abs() / (t[1].abs() + t[2].abs());
                    let e3 = scale * t[1].abs() / (t[1].abs() + t[2].abs());
                    prop_assert!(combo(e2, e3) > joint);
                }
            }
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn kernel_and_intersection_agree_with_elimination(seed in any::<u64>()) {
        let mut rng = substream(seed, 0);
        let (a, b) = random_commuting_pair(&mut rng, 12);
        let tol = default_kernel_tol(&[&a, &b]);
        let ka = kernel(&a, tol);
        prop_assert_eq!(ka.dim(), a.dim() - common::rank(&a.to_rows(), common::ge_tol(&[&a], GE_REL)));
        let both = subspace_intersection(&ka, &kernel(&b, tol), INTERSECTION_TOL).unwrap();
        prop_assert_eq!(both.dim(), joint_nullity(&a, &b, GE_REL));
        for v in both.basis() {
            prop_assert!((a.matrix() * v).norm() < 1e-9 && (b.matrix() * v).norm() < 1e-9);
        }
    }
}

#[test]
fn spec_pairs() {
    let d = |v: &[f64]| SymMat::diag(v);
    let r = perturbed_kernel_equality(&d(&[0.0, 0.0, 1.0]), &d(&[0.0, 1.0, 0.0]), 0.5, 1e-12).unwrap();
    assert!(r.holds);
    assert_eq!(r.dims(), (1, 1, 1));
    let t = delta_threshold(&d(&[2.0, 0.0, 1.0]), &d(&[1.0, 3.0, -1.0]), 1e-12).unwrap();
    assert_eq!(t.value(), 1.0);
    let jump = perturbed_kernel_equality(&d(&[2.0, 0.0, 1.0]), &d(&[1.0, 3.0, -1.0]), 1.0, 1e-12).unwrap();
    assert!(!jump.holds);
    assert_eq!(jump.perturbed_dim, 1);
}

#[test]
fn mixed_trailing_signs_defeat_every_uniform_threshold() {
    // joint eigenvector e_0 has levels (0, 1, -1): A_1 + e A_2 + e A_3 kills it for every e
    let d = |v: &[f64]| SymMat::diag(v);
    let members = vec![d(&[0.0, 1.0]), d(&[1.0, 1.0]), d(&[-1.0, 1.0])];
    let fam = CommutingFamily::new(members.clone()).unwrap();
    assert!(matches!(chain_threshold(&fam), Err(Error::NoUniformThreshold { .. })));
    let joint = joint_kernel(&fam, 1e-12).unwrap();
    assert_eq!(joint.dim(), 0);
    for e in [0.5, 1e-3, 1e-8] {
        let s = members[0].add_scaled(e, &members[1]).unwrap().add_scaled(e, &members[2]).unwrap();
        assert_eq!(kernel(&s, 1e-12).dim(), 1);
    }
}
