use super::*;
use crate::devices::*;
use crate::sdp::Status;
use crate::{Hermitian, Tolerances};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn xz() -> (Observable, Observable) {
    let (x, _, z) = mub_qubit();
    (x, z)
}

fn noisy(m: &Observable, lam: f64) -> Observable {
    mix_with_trivial(m, lam, &TrivialObservable::uniform(m.dim(), m.num_outcomes())).unwrap()
}

#[test]
fn commuting_pair_is_jointly_measurable() {
    let (q3, _) = fourier_pair(3).unwrap();
    let r = relabel(&q3, &[0, 0, 1], 2).unwrap();
    let v = check_joint(&[q3.clone(), r.clone()], &tol()).unwrap();
    assert_eq!(v.status(), Status::Feasible);
    assert!(v.joint.unwrap().marginal_defect(&[q3, r]) < 1e-8);
}

#[test]
fn sharp_x_z_are_incompatible() {
    let (x, z) = xz();
    assert!(check_joint(&[x, z], &tol()).unwrap().status().is_infeasible());
}

#[test]
fn noisy_x_z_threshold_examples() {
    let (x, z) = xz();
    let at = |lam| {
        let spec = NoiseSpec::symmetric(2, lam, NoiseMode::UniformTrivial).unwrap();
        region_membership(&[x.clone(), z.clone()], &spec, &tol()).unwrap().status()
    };
    assert_eq!(at(0.65), Status::Feasible);
    assert!(at(0.75).is_infeasible());
}

#[test]
fn toss_joint_marginals() {
    let (x, y, z) = mub_qubit();
    let t = TrivialObservable::uniform(2, 2);
    let j = build_toss_joint(&[x.clone(), z.clone()], &[t.clone(), t.clone()]).unwrap();
    let want = [mix_with_trivial(&x, 0.5, &t).unwrap(), mix_with_trivial(&z, 0.5, &t).unwrap()];
    assert!(j.marginal_defect(&want) < 1e-14);
    let obs = [x.clone(), y.clone(), z.clone()];
    let j = build_toss_joint(&obs, &[t.clone(), t.clone(), t.clone()]).unwrap();
    let want: Vec<_> = obs.iter().map(|m| mix_with_trivial(m, 1.0 / 3.0, &t).unwrap()).collect();
    assert!(j.marginal_defect(&want) < 1e-14);
    let j = build_toss_joint(&[x.clone()], &[t]).unwrap();
    assert!(j.marginal_defect(&[x]) < 1e-15);
}

#[test]
fn postprocess_joint_marginals() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let m = random_povm(2, 4, &mut rng).unwrap();
    let p1 = random_stochastic(2, 4, &mut rng);
    let p2 = random_stochastic(3, 4, &mut rng);
    let j = build_postprocess_joint(&m, &[p1.clone(), p2.clone()]).unwrap();
    let want = [post_process(&m, &p1).unwrap(), post_process(&m, &p2).unwrap()];
    assert!(j.marginal_defect(&want) < 1e-12);
    let single = build_postprocess_joint(&m, &[p1.clone()]).unwrap();
    assert!(single.marginal_defect(&want[..1]) < 1e-12);
    let (q2, _) = fourier_pair(2).unwrap();
    let prod = build_postprocess_joint(&q2, &[StochasticMatrix::identity(2)]).unwrap();
    assert!(prod.marginal_defect(&[q2]) < 1e-15);
}

#[test]
fn qp_region_examples() {
    let (q3, p3) = fourier_pair(3).unwrap();
    let at = |a: f64, b: f64| {
        let spec = NoiseSpec::new(vec![a, b], NoiseMode::OptimizedTrivial).unwrap();
        region_membership(&[q3.clone(), p3.clone()], &spec, &tol()).unwrap().status()
    };
    assert_eq!(at(0.9, 0.2), Status::Feasible);
    assert!(at(0.9, 0.9).is_infeasible());
    assert_eq!(at(0.5, 0.5), Status::Feasible);
}

#[test]
fn region_formula_examples() {
    for d in [2, 3, 5, 100] {
        let g = qp_degree_closed_form(d);
        assert!(region_formula_qp_margin(d, g, g).abs() < 1e-12);
        assert!(region_formula_qp(d, 0.0, 0.95));
    }
    assert!(!region_formula_qp(3, 1.0, 1.0));
    assert!((qp_degree_closed_form(2) - 0.70711).abs() < 1e-5);
    assert!((qp_degree_closed_form(3) - 0.68301).abs() < 1e-5);
}

#[test]
fn degree_examples() {
    let (q3, _) = fourier_pair(3).unwrap();
    let d = degree_of_compatibility(&[q3.clone(), q3.clone()], NoiseMode::OptimizedTrivial, &tol()).unwrap();
    assert_eq!(d.value, 1.0);
    let (q2, p2) = fourier_pair(2).unwrap();
    let d = degree_of_compatibility(&[q2, p2], NoiseMode::OptimizedTrivial, &tol()).unwrap();
    assert!((d.value - qp_degree_closed_form(2)).abs() < 5e-3);
    let (x, y, z) = mub_qubit();
    let d = degree_of_compatibility(&[x, y, z], NoiseMode::UniformTrivial, &tol()).unwrap();
    assert!((d.value - 1.0 / 3f64.sqrt()).abs() < 5e-3);
    assert_eq!(degree_of_compatibility(&[q3], NoiseMode::UniformTrivial, &tol()).unwrap().value, 1.0);
}

#[test]
fn jordan_examples() {
    let (q3, _) = fourier_pair(3).unwrap();
    let r = relabel(&q3, &[1, 0, 1], 2).unwrap();
    assert!(jordan_criterion(&[q3, r]).unwrap().is_certified());
    let (x, z) = xz();
    match jordan_criterion(&[noisy(&x, 0.7), noisy(&z, 0.7)]).unwrap() {
        JordanOutcome::CompatibleCertified(j) => {
            let lo = j.observable().effects().iter().map(|e| e.min_eigenvalue().unwrap()).fold(f64::INFINITY, f64::min);
            assert!((lo - 0.25 * (1.0 - 0.7 * 2f64.sqrt())).abs() < 1e-12);
            assert!((lo - 0.00251).abs() < 1e-5);
        }
        other => panic!("expected certificate, got {other:?}"),
    }
    assert!(!jordan_criterion(&[noisy(&x, 0.75), noisy(&z, 0.75)]).unwrap().is_certified());
    let (xx, _, _) = mub_qubit();
    assert!(jordan_criterion(&vec![xx; 5]).is_err());
}

#[test]
fn miyadera_imai_examples() {
    let (x, z) = xz();
    match miyadera_imai(&x, &z).unwrap() {
        MiyaderaImaiOutcome::IncompatibleCertified { lhs, rhs, .. } => {
            assert!((lhs - 0.25).abs() < 1e-12 && rhs.abs() < 1e-12);
        }
        o => panic!("{o:?}"),
    }
    let (q3, _) = fourier_pair(3).unwrap();
    assert!(!miyadera_imai(&q3, &q3).unwrap().is_certified());
    match miyadera_imai(&noisy(&x, 0.9), &noisy(&z, 0.9)).unwrap() {
        MiyaderaImaiOutcome::IncompatibleCertified { lhs, rhs, .. } => {
            assert!((lhs - (0.81f64 / 2.0).powi(2)).abs() < 1e-12);
            assert!((rhs - 4.0 * ((1.0f64 - 0.81) / 4.0).powi(2)).abs() < 1e-12);
        }
        o => panic!("{o:?}"),
    }
}

#[test]
fn unsharpness_discrepancy_and_commutator_bound() {
    let (_, z) = xz();
    assert!(unsharpness(&z).unwrap() < 1e-15);
    for lam in [0.3, 0.8] {
        assert!((unsharpness(&noisy(&z, lam)).unwrap() - (1.0 - lam * lam) / 4.0).abs() < 1e-14);
    }
    let (q2, p2) = fourier_pair(2).unwrap();
    assert!((commutator_bound(&q2, &p2).unwrap() - 0.5).abs() < 1e-14);
    let (q3, p3) = fourier_pair(3).unwrap();
    assert!((commutator_bound(&q3, &p3).unwrap() - 2f64.sqrt() / 3.0).abs() < 1e-12);
    assert!((discrepancy(&z, &noisy(&z, 0.6)).unwrap() - 0.2).abs() < 1e-14);
}

#[test]
fn mur_examples() {
    let (q2, p2) = fourier_pair(2).unwrap();
    let r = mur_test(&q2, &p2, &q2, &p2).unwrap();
    assert!(r.incompatible_certified && r.lhs.abs() < 1e-15);
    let (q3, p3) = fourier_pair(3).unwrap();
    let (a, b) = (noisy(&q3, 0.6), noisy(&p3, 0.6));
    let j = match jordan_criterion(&[a, b]).unwrap() {
        JordanOutcome::CompatibleCertified(j) => j,
        o => panic!("{o:?}"),
    };
    let r = mur_test(&q3, &p3, &j.marginal(0).unwrap(), &j.marginal(1).unwrap()).unwrap();
    assert!(!r.incompatible_certified);
    assert!(r.lhs >= 2f64.sqrt() / 3.0);
}

#[test]
fn zhu_examples() {
    assert!(!zhu_criterion(&[1.0, 0.0, 0.0]));
    assert!(zhu_criterion(&[0.8, 0.8]));
    assert!(!zhu_criterion(&[0.577, 0.577, 0.577]));
}

#[test]
fn informational_completeness() {
    let s = 1.0 / 3f64.sqrt();
    let dirs = [[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]];
    let (x, y, z) = mub_qubit();
    let pauli = |k: usize| match k {
        0 => &x.effect(0).scale(2.0) - &Hermitian::identity(2),
        1 => &y.effect(0).scale(2.0) - &Hermitian::identity(2),
        _ => &z.effect(0).scale(2.0) - &Hermitian::identity(2),
    };
    let effects: Vec<Hermitian> = dirs
        .iter()
        .map(|n| {
            let mut e = Hermitian::identity(2);
            for (k, c) in n.iter().enumerate() {
                e = &e + &pauli(k).scale(*c);
            }
            e.scale(0.25)
        })
        .collect();
    let sic = Observable::new(effects).unwrap();
    assert!(is_informationally_complete(&sic).unwrap());
    assert!(!has_projection_in_range(&sic).unwrap());
    let (q2, _) = fourier_pair(2).unwrap();
    assert!(!is_informationally_complete(&q2).unwrap());
    assert!(has_projection_in_range(&q2).unwrap());
}

#[test]
fn coexistence_hierarchy() {
    let (x, _, z) = mub_qubit();
    let pair = [noisy(&x, 0.6), noisy(&z, 0.6)];
    assert_eq!(check_coexistent(&pair, &tol()).unwrap().status, Status::Feasible);
    assert_eq!(check_weakly_coexistent(&pair, &tol()).unwrap().status, Status::Feasible);
    let sharp = [x.clone(), z.clone()];
    assert!(check_coexistent(&sharp, &tol()).unwrap().status.is_infeasible());
    let weak = check_weakly_coexistent(&sharp, &tol()).unwrap();
    assert!(weak.status.is_infeasible());
    assert!(weak.failing.is_some());
    let (q3, _) = fourier_pair(3).unwrap();
    let triple = [relabel(&q3, &[0, 1, 1], 2).unwrap(), relabel(&q3, &[1, 0, 1], 2).unwrap(), relabel(&q3, &[1, 1, 0], 2).unwrap()];
    assert_eq!(check_joint(&triple, &tol()).unwrap().status(), Status::Feasible);
    assert_eq!(check_coexistent(&triple, &tol()).unwrap().status, Status::Feasible);
    assert_eq!(check_weakly_coexistent(&triple, &tol()).unwrap().status, Status::Feasible);
    let four = fourier_pair(4).unwrap().0;
    assert!(matches!(check_coexistent(&[four], &tol()), Err(crate::Error::CapExceeded { .. })));
}

#[test]
fn postprocessing_order_examples() {
    let (q3, _) = fourier_pair(3).unwrap();
    let r = relabel(&q3, &[0, 1, 0], 2).unwrap();
    match postprocessing_order(&r, &q3, &tol()).unwrap() {
        OrderOutcome::Below(p) => assert!((p.get(0, 0) - 1.0).abs() < 1e-6 && p.get(1, 0).abs() < 1e-6),
        o => panic!("{o:?}"),
    }
    let t = TrivialObservable::new(3, vec![0.2, 0.3, 0.5]).unwrap().to_observable();
    assert!(postprocessing_order(&t, &q3, &tol()).unwrap().is_below());
    let (x, z) = xz();
    assert!(!postprocessing_order(&x, &z, &tol()).unwrap().is_below());
}
