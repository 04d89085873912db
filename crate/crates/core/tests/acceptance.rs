//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

use qincompat::chancompat::{
    channel_division, check_channel_pair, robustness, state_marginal_feasible, DevicePair, NoiseClass,
};
use qincompat::devices::*;
use qincompat::obschan::{
    below_least_disturbing, check_obs_channel, least_disturbing_channel, random_compatible_channel,
    rank1_channel_form_check,
};
use qincompat::obscompat::*;
use qincompat::process::{commutation_vs_compat_report, orthogonal_probe_pair, tester_degree, Tester};
use qincompat::steering::{assemblage_from, check_lhs, maximally_entangled, noisy_family, steering_jm_crosscheck};
use qincompat::{Matrix, Tolerances};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};

type Check = Result<String, String>;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e2s<T>(r: qincompat::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn within_time(t: Instant, limit: Duration) -> Result<(), String> {
    ensure(t.elapsed() <= limit, format!("took {:.1?}, limit {:?}", t.elapsed(), limit))
}

fn qp_degree(d: usize, limit: Duration) -> Check {
    let t = Instant::now();
    let (q, p) = e2s(fourier_pair(d))?;
    let deg = e2s(degree_of_compatibility(&[q, p], NoiseMode::OptimizedTrivial, &tol()))?;
    let want = 0.5 * (1.0 + 1.0 / (1.0 + (d as f64).sqrt()));
    ensure((deg.value - want).abs() <= 5e-3, format!("degree {:.5} vs {want:.5}", deg.value))?;
    within_time(t, limit)?;
    Ok(format!("degree {:.5} vs {want:.5} (±5e-3) in {:.2?}", deg.value, t.elapsed()))
}

fn region_grid() -> Check {
    let grid = [0.0, 0.25, 0.5, 0.75, 1.0];
    let mut compared = 0;
    for d in [2usize, 3] {
        let (q, p) = e2s(fourier_pair(d))?;
        let pair = [q, p];
        for &a in &grid {
            for &b in &grid {
                let inside = region_formula_qp(d, a, b);
                let near = [-1e-2, 0.0, 1e-2].iter().any(|&da| {
                    [-1e-2, 0.0, 1e-2].iter().any(|&db| {
                        let (x, y) = ((a + da).clamp(0.0, 1.0), (b + db).clamp(0.0, 1.0));
                        region_formula_qp(d, x, y) != inside
                    })
                });
                if near {
                    continue;
                }
                let spec = e2s(NoiseSpec::new(vec![a, b], NoiseMode::OptimizedTrivial))?;
                let v = e2s(region_membership(&pair, &spec, &tol()))?;
                ensure(
                    v.is_feasible() == inside,
                    format!("d={d} ({a},{b}): SDP {} but formula inside={inside}", v.status()),
                )?;
                compared += 1;
            }
        }
    }
    Ok(format!("{compared} grid points compared, 0 disagreements"))
}

fn xz_threshold() -> Check {
    let (x, _, z) = mub_qubit();
    let deg = e2s(degree_of_compatibility(&[x.clone(), z.clone()], NoiseMode::UniformTrivial, &tol()))?;
    let analytic = 1.0 / 2f64.sqrt();
    ensure((deg.value - analytic).abs() <= 5e-3, format!("threshold {:.5}", deg.value))?;
    for lam in [0.2, 0.5, 0.7, 0.75, 0.9] {
        let fam = e2s(noisy_family(&[x.clone(), z.clone()], lam))?;
        let mut lowest = f64::INFINITY;
        for a in fam[0].effects() {
            for b in fam[1].effects() {
                lowest = lowest.min(e2s(a.jordan(b).min_eigenvalue())?);
            }
        }
        let formula = 0.25 * (1.0 - lam * 2f64.sqrt());
        ensure((lowest - formula).abs() < 1e-12, format!("λ={lam}: Jordan min eigenvalue {lowest} vs {formula}"))?;
        ensure(
            e2s(jordan_criterion(&fam))?.is_certified() == (lam <= analytic),
            format!("λ={lam}: Jordan certification sign"),
        )?;
    }
    ensure(deg.value <= analytic && analytic <= deg.upper, "analytic threshold outside the bisection bracket")?;
    Ok(format!("threshold {:.5} bracket [{:.5}, {:.5}] ∋ 1/√2", deg.value, deg.value, deg.upper))
}

fn xyz_threshold() -> Check {
    let (x, y, z) = mub_qubit();
    let deg = e2s(degree_of_compatibility(&[x, y, z], NoiseMode::UniformTrivial, &tol()))?;
    let want = 1.0 / 3f64.sqrt();
    ensure((deg.value - want).abs() <= 5e-3, format!("threshold {:.5}", deg.value))?;
    ensure(deg.value > 5.0 / 9.0, format!("threshold {:.5} not above 5/9", deg.value))?;
    Ok(format!("threshold {:.5} vs {want:.5}, above 5/9", deg.value))
}

fn cloner() -> Check {
    let mut out = Vec::new();
    for (d, n, want) in [(2, 2, 2.0 / 3.0), (3, 2, 5.0 / 8.0), (2, 3, 5.0 / 9.0)] {
        let c = e2s(cloner_coefficient(d, n))?;
        ensure((c - want).abs() <= 1e-9, format!("c({d},{n}) = {c}"))?;
        out.push(format!("c({d},{n})={c:.9}"));
    }
    Ok(out.join(" "))
}

fn channel_pairs() -> Check {
    let t = tol();
    let id = Channel::identity(2);
    let dep = Channel::depolarizing_to(&State::maximally_mixed(2), 2);
    let dz = e2s(diag_channel(&Matrix::identity(2)))?;
    let dx = e2s(diag_channel(&fourier_matrix(2)))?;
    ensure(e2s(check_channel_pair(&id, &id, &t))?.status().is_infeasible(), "(id,id) not infeasible")?;
    ensure(e2s(check_channel_pair(&id, &dep, &t))?.is_feasible(), "(id,dep) not feasible")?;
    ensure(e2s(check_channel_pair(&dz, &dx, &t))?.status().is_infeasible(), "(diag_z,diag_x) not infeasible")?;
    ensure(e2s(check_channel_pair(&dz, &dz, &t))?.is_feasible(), "(diag_z,diag_z) not feasible")?;
    Ok("(id,id) INFEASIBLE, (id,dep) FEASIBLE, (Δz,Δx) INFEASIBLE, (Δz,Δz) FEASIBLE".into())
}

fn self_conjugate() -> Check {
    let mut worst: f64 = 0.0;
    for d in [2, 3] {
        let (ca, cb) = e2s(ctrl_unitary_selfconjugate(d, &clock_unitaries(d)))?;
        let dz = e2s(diag_channel(&Matrix::identity(d)))?;
        worst = worst.max(ca.choi_distance(&dz)).max(cb.choi_distance(&dz));
    }
    ensure(worst <= 1e-10, format!("Choi distance {worst:e}"))?;
    Ok(format!("max Choi distance to the diagonal channel {worst:.1e}"))
}

fn obs_channel() -> Check {
    let t = tol();
    let (x, _, z) = mub_qubit();
    let id = Channel::identity(2);
    ensure(e2s(check_obs_channel(&z, &id, &t))?.status().is_infeasible(), "Z with identity not infeasible")?;
    let triv = e2s(TrivialObservable::new(2, vec![0.4, 0.6]))?.to_observable();
    ensure(e2s(check_obs_channel(&triv, &id, &t))?.is_feasible(), "trivial with identity not feasible")?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for k in 0..20 {
        let m = e2s(random_povm(2, 2 + k % 2, &mut rng))?;
        let l = e2s(least_disturbing_channel(&m))?;
        ensure(e2s(check_obs_channel(&m, &l, &t))?.is_feasible(), format!("POVM {k}: (M, Λ_M) not feasible"))?;
    }
    let states = [State::basis(2, 0), State::basis(2, 1)];
    let c = e2s(Instrument::measure_prepare(&x, &states))?;
    let w = e2s(check_obs_channel(&x, &e2s(c.total_channel())?, &t))?;
    let inst = w.instrument.ok_or("no witness instrument")?;
    let total = e2s(inst.total_channel())?;
    ensure(e2s(rank1_channel_form_check(&x, &total))?, "rank-one form check failed")?;
    Ok("Z+id INFEASIBLE, trivial+id FEASIBLE, 20/20 (M,Λ_M) FEASIBLE, rank-one form verified".into())
}

fn obs_channel_order() -> Check {
    let t = tol();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut feasible, mut infeasible) = (0, 0);
    for k in 0..20 {
        let m = e2s(random_povm(2, 2, &mut rng))?;
        let c = if k % 2 == 0 {
            e2s(random_compatible_channel(&m, 2, &mut rng))?
        } else {
            e2s(random_channel(2, 2, 1 + k % 3, &mut rng))?
        };
        let v = e2s(check_obs_channel(&m, &c, &t))?;
        let below = e2s(below_least_disturbing(&m, &c, &t))?.is_below();
        ensure(v.is_feasible() == below, format!("instance {k}: {} vs division below={below}", v.status()))?;
        if below {
            feasible += 1;
        } else {
            infeasible += 1;
        }
    }
    Ok(format!("20 instances agree ({feasible} compatible, {infeasible} not)"))
}

fn steering() -> Check {
    let t = tol();
    let (x, _, z) = mub_qubit();
    let r = e2s(steering_jm_crosscheck(&[x, z], 0.6, &t))?;
    ensure((r.lhs_threshold - 0.7071).abs() <= 1e-2, format!("LHS threshold {:.4}", r.lhs_threshold))?;
    ensure((r.lhs_threshold - r.joint_threshold).abs() <= 1e-2, "thresholds differ")?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut steerable = 0;
    for k in 0..20 {
        let n = 2 + k % 2;
        let obs: Vec<Observable> = (0..n).map(|_| random_povm_with_rank(2, 2, 1, &mut rng)).collect::<qincompat::Result<_>>().map_err(|e| e.to_string())?;
        let lam: f64 = rng.gen_range(0.5..1.0);
        let fam = e2s(noisy_family(&obs, lam))?;
        let a = e2s(assemblage_from(&maximally_entangled(2), 2, &fam))?;
        let lhs = e2s(check_lhs(&a, &t))?;
        let tr: Vec<Observable> = fam.iter().map(|m| m.transpose()).collect();
        let jm = e2s(check_joint(&tr, &t))?;
        ensure(lhs.is_unsteerable() == jm.is_feasible(), format!("instance {k}: {} vs {}", lhs.status(), jm.status()))?;
        if !lhs.is_unsteerable() {
            steerable += 1;
        }
    }
    Ok(format!(
        "thresholds LHS {:.4} JM {:.4}; 20 instances agree ({steerable} steerable)",
        r.lhs_threshold, r.joint_threshold
    ))
}

fn testers() -> Check {
    let t = tol();
    let (dm, dn) = orthogonal_probe_pair();
    let rep = e2s(commutation_vs_compat_report(&dm, &dn, &t))?;
    ensure(rep.status.is_infeasible(), format!("pair {}", rep.status))?;
    ensure(rep.max_commutator < 1e-14, format!("commutator {:e}", rep.max_commutator))?;
    let q = e2s(tester_degree(&dm, &dn, &t))?.value;
    ensure((q - 0.5).abs() <= 5e-3, format!("degree {q}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut lowest: f64 = 1.0;
    for _ in 0..8 {
        let a = e2s(Tester::probe_measure(&random_state(2, &mut rng), &e2s(random_povm(2, 2, &mut rng))?))?;
        let b = e2s(Tester::probe_measure(&random_pure_state(2, &mut rng), &e2s(random_povm(2, 3, &mut rng))?))?;
        lowest = lowest.min(e2s(tester_degree(&a, &b, &t))?.value);
    }
    ensure(lowest >= 0.5 - 5e-3, format!("random pair degree {lowest}"))?;
    Ok(format!("INFEASIBLE with commutators {:.0e}; degree {q:.4}; random pairs ≥ {lowest:.4}", rep.max_commutator))
}

fn mur() -> Check {
    let (q, p) = e2s(fourier_pair(2))?;
    let c = e2s(commutator_bound(&q, &p))?;
    ensure((c - 0.5).abs() < 1e-12, format!("c = {c}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst = f64::INFINITY;
    for k in 0..100 {
        let joint = if k % 5 == 0 {
            let lam: f64 = rng.gen_range(0.3..0.7);
            match e2s(jordan_criterion(&e2s(noisy_family(&[q.clone(), p.clone()], lam))?))? {
                JordanOutcome::CompatibleCertified(j) => j,
                JordanOutcome::Inconclusive { .. } => return Err(format!("no Jordan joint at λ={lam}")),
            }
        } else {
            let g = e2s(random_povm(2, 4, &mut rng))?;
            e2s(JointObservable::new(g.effects().to_vec(), vec![2, 2], 1e-10))?
        };
        let (mp, np) = (e2s(joint.marginal(0))?, e2s(joint.marginal(1))?);
        let r = e2s(mur_test(&q, &p, &mp, &np))?;
        worst = worst.min(r.lhs - r.bound);
    }
    ensure(worst >= -1e-9, format!("violation {worst:e}"))?;
    Ok(format!("c = {c:.6}; 100 compatible pairs, smallest slack {worst:.4}"))
}

fn channel_robustness() -> Check {
    let t = tol();
    let (_, _, z) = mub_qubit();
    let id = Channel::identity(2);
    let r1 = e2s(robustness(&DevicePair::Channels(id.clone(), id.clone()), NoiseClass::ArbitraryNoise, &t))?;
    let r2 = e2s(robustness(&DevicePair::ObservableChannel(z, id), NoiseClass::ArbitraryNoise, &t))?;
    ensure((r1 - 0.75).abs() <= 1e-2, format!("(id,id) {r1}"))?;
    ensure((r2 - 0.8536).abs() <= 1e-2, format!("(Z,id) {r2}"))?;
    Ok(format!("(id,id) {r1:.4}; (Z,id) {r2:.4}"))
}

fn random_compatible_pair(rng: &mut ChaCha8Rng, d: usize) -> qincompat::Result<(Observable, Observable)> {
    let g = random_povm(d, 4, rng)?;
    let j = JointObservable::new(g.effects().to_vec(), vec![2, 2], 1e-10)?;
    Ok((j.marginal(0)?, j.marginal(1)?))
}

fn properties() -> Check {
    let t = tol();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for k in 0..50 {
        let (m, n) = e2s(random_compatible_pair(&mut rng, 2))?;
        let p = random_stochastic(3, 2, &mut rng);
        let q = random_stochastic(2, 2, &mut rng);
        let (mp, np) = (e2s(post_process(&m, &p))?, e2s(post_process(&n, &q))?);
        ensure(e2s(check_joint(&[mp, np], &t))?.is_feasible(), format!("monotonicity instance {k}"))?;
    }
    let (x, y, z) = mub_qubit();
    let obs = [x, y, z];
    let trivials: Vec<TrivialObservable> = (0..3).map(|_| TrivialObservable::uniform(2, 2)).collect();
    let toss = e2s(build_toss_joint(&obs, &trivials))?;
    let mixtures: Vec<Observable> = obs
        .iter()
        .zip(&trivials)
        .map(|(m, tr)| mix_with_trivial(m, 1.0 / 3.0, tr))
        .collect::<qincompat::Result<_>>()
        .map_err(|e| e.to_string())?;
    let defect = toss.marginal_defect(&mixtures);
    ensure(defect < 1e-12, format!("toss marginal defect {defect:e}"))?;
    let (mut jordan_hits, mut mi_hits) = (0, 0);
    for k in 0..50 {
        let a = e2s(random_povm_with_rank(2, 2, 1, &mut rng))?;
        let b = e2s(random_povm_with_rank(2, 2, 1, &mut rng))?;
        let lam: f64 = rng.gen_range(0.3..1.0);
        let fam = e2s(noisy_family(&[a, b], lam))?;
        let sdp = e2s(check_joint(&fam, &t))?;
        if e2s(jordan_criterion(&fam))?.is_certified() {
            jordan_hits += 1;
            ensure(sdp.is_feasible(), format!("pair {k}: Jordan certified but SDP {}", sdp.status()))?;
        }
        if e2s(miyadera_imai(&fam[0], &fam[1]))?.is_certified() {
            mi_hits += 1;
            ensure(!sdp.is_feasible(), format!("pair {k}: MI certified but SDP feasible"))?;
        }
    }
    let bell = maximally_entangled(2);
    let v = e2s(state_marginal_feasible(bell.rho(), bell.rho(), (2, 2, 2), false, &t))?;
    ensure(v.status.is_infeasible(), format!("monogamy instance {}", v.status))?;
    Ok(format!(
        "monotonicity 50/50; toss defect {defect:.0e}; Jordan {jordan_hits} and MI {mi_hits} certificates consistent; monogamy INFEASIBLE"
    ))
}

fn division_sanity() -> Result<(), String> {
    let id = Channel::identity(2);
    ensure(e2s(channel_division(&id, &id, &tol()))?.is_below(), "identity division")
}

fn main() {
    let criteria: Vec<(&str, Box<dyn Fn() -> Check>)> = vec![
        ("position-momentum degree d=2", Box::new(|| qp_degree(2, Duration::from_secs(60)))),
        ("position-momentum degree d=3", Box::new(|| qp_degree(3, Duration::from_secs(300)))),
        ("compatibility region grid vs closed form", Box::new(region_grid)),
        ("qubit X,Z threshold and Jordan positivity", Box::new(xz_threshold)),
        ("qubit X,Y,Z threshold above the cloner bound", Box::new(xyz_threshold)),
        ("universal cloner marginal coefficients", Box::new(cloner)),
        ("channel pair verdicts", Box::new(channel_pairs)),
        ("self-conjugate controlled-unitary marginals", Box::new(self_conjugate)),
        ("observable-channel instruments", Box::new(obs_channel)),
        ("compatibility vs least-disturbing division", Box::new(obs_channel_order)),
        ("steering vs joint measurability", Box::new(steering)),
        ("process tester incompatibility", Box::new(testers)),
        ("approximate joint measurement inequality", Box::new(mur)),
        ("channel robustness under arbitrary noise", Box::new(channel_robustness)),
        ("property suites", Box::new(properties)),
    ];
    let start = Instant::now();
    let mut failed = 0;
    if let Err(e) = division_sanity() {
        println!("setup failed: {e}");
        std::process::exit(1);
    }
    for (k, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let r = f();
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok(msg) => println!("[{:02}] PASS {name}: {msg} [{secs:.2}s]", k + 1),
            Err(msg) => {
                failed += 1;
                println!("[{:02}] FAIL {name}: {msg} [{secs:.2}s]", k + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        criteria.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
