//! Observable–channel compatibility through instruments.

use crate::chancompat::{channel_division, DivisionOutcome};
use crate::devices::{naimark_dilate, Channel, Instrument, Observable};
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, partial_trace_multi};
use crate::num::{cx, czero};
use crate::obscompat::postprocessing_order;
use crate::sdp::{solve_feasibility, BlockId, LinearMap, SdpProblem, Status, Verdict};
use crate::{Hermitian, Matrix, Tolerances};
use rand::Rng;

/// Largest instrument SDP size `m·(d·d_out)²` accepted.
pub const INSTRUMENT_SIZE_CAP: usize = 1 << 16;

#[derive(Clone, Debug)]
pub struct ObsChannelVerdict {
    pub verdict: Verdict,
    pub instrument: Option<Instrument>,
}

impl ObsChannelVerdict {
    pub fn status(&self) -> Status {
        self.verdict.status
    }

    pub fn is_feasible(&self) -> bool {
        self.verdict.is_feasible()
    }
}

fn tr_out_map(din: usize, dout: usize) -> Result<LinearMap> {
    LinearMap::from_fn(din * dout, din, |h| partial_trace_multi(h, &[din, dout], &[0]))
}

/// Existence of an instrument with total channel `C` and induced observable `M`.
pub fn check_obs_channel(m: &Observable, c: &Channel, tol: &Tolerances) -> Result<ObsChannelVerdict> {
    if m.dim() != c.in_dim() {
        return Err(Error::DimensionMismatch("observable and channel act on different inputs".into()));
    }
    let (din, dout, k) = (c.in_dim(), c.out_dim(), m.num_outcomes());
    let size = k * (din * dout).pow(2);
    if size > INSTRUMENT_SIZE_CAP {
        return Err(Error::CapExceeded {
            what: "instrument SDP size".into(),
            count: size,
            cap: INSTRUMENT_SIZE_CAP,
        });
    }
    let mut p = SdpProblem::new();
    let ops: Vec<BlockId> = (0..k).map(|_| p.add_psd(din * dout, din as f64)).collect();
    p.add_matrix_equality(
        ops.iter().map(|&b| (b, LinearMap::scaled_identity(din * dout, 1.0))).collect(),
        c.choi(),
    )?;
    let tr = tr_out_map(din, dout)?;
    for (x, &b) in ops.iter().enumerate() {
        p.add_matrix_equality(vec![(b, tr.clone())], &m.effect(x).transpose())?;
    }
    let verdict = solve_feasibility(&p, tol)?;
    let instrument = if verdict.is_feasible() {
        let chois = ops.iter().map(|&b| verdict.psd(b).expect("witness").clone()).collect();
        Some(Instrument::with_tolerance(chois, din, dout, tol.verify())?)
    } else {
        None
    };
    Ok(ObsChannelVerdict { verdict, instrument })
}

/// `I_x(ρ) = √M(x) ρ √M(x)`.
pub fn luders_instrument(m: &Observable) -> Result<Instrument> {
    Instrument::luders(m)
}

/// `Λ_M(ρ) = Σ_x √M(x) ρ √M(x) ⊗ |x⟩⟨x|`, the projected Naimark isometry, on
/// `C^d ⊗ C^m`.
pub fn least_disturbing_channel(m: &Observable) -> Result<Channel> {
    let dil = naimark_dilate(m)?;
    let kraus = dil
        .sharp_effects
        .iter()
        .map(|p| p.as_matrix().matmul(&dil.isometry))
        .collect::<Result<Vec<_>>>()?;
    Channel::from_kraus(kraus)
}

/// Total channel of `I_x(ρ) = E_x(√M(x) ρ √M(x))`, a channel compatible with `M`.
pub fn compatible_channel_from(m: &Observable, post: &[Channel]) -> Result<Channel> {
    if post.len() != m.num_outcomes() {
        return Err(Error::DimensionMismatch("one post-channel per outcome".into()));
    }
    let mut kraus = Vec::new();
    for (e, c) in m.effects().iter().zip(post) {
        let root = e.sqrt_psd(1e-10)?.into_matrix();
        for k in c.kraus() {
            kraus.push(k.matmul(&root)?);
        }
    }
    Channel::from_kraus(kraus)
}

/// A random channel compatible with `M`.
pub fn random_compatible_channel(m: &Observable, dout: usize, rng: &mut impl Rng) -> Result<Channel> {
    let post = (0..m.num_outcomes())
        .map(|_| crate::devices::random_channel(m.dim(), dout, 2, rng))
        .collect::<Result<Vec<_>>>()?;
    compatible_channel_from(m, &post)
}

#[derive(Clone, Debug, PartialEq)]
pub struct NddrReport {
    /// `M ⪯ N` in the post-processing order.
    pub m_below_n: bool,
    /// `Λ_N = E ∘ Λ_M` for some channel `E`.
    pub lambda_n_below_lambda_m: bool,
    /// Sampled channels compatible with `N`.
    pub sampled: usize,
    /// Of those, how many are compatible with `M`.
    pub sampled_compatible_with_m: usize,
}

impl NddrReport {
    /// The three conditions agree.
    pub fn consistent(&self) -> bool {
        let inclusion = self.sampled_compatible_with_m == self.sampled;
        if self.m_below_n {
            self.lambda_n_below_lambda_m && inclusion
        } else {
            !self.lambda_n_below_lambda_m
        }
    }
}

/// Checks the order relations `M ⪯ N`, `Λ_N ⪯ Λ_M`, and
/// compatibility of channels sampled for `N` with `M`.
pub fn nddr_test(m: &Observable, n: &Observable, samples: usize, rng: &mut impl Rng, tol: &Tolerances) -> Result<NddrReport> {
    let m_below_n = postprocessing_order(m, n, tol)?.is_below();
    let lm = least_disturbing_channel(m)?;
    let ln = least_disturbing_channel(n)?;
    let lambda_n_below_lambda_m = channel_division(&ln, &lm, tol)?.is_below();
    let mut ok = 0;
    for _ in 0..samples {
        let c = random_compatible_channel(n, n.dim(), rng)?;
        if check_obs_channel(m, &c, tol)?.is_feasible() {
            ok += 1;
        }
    }
    Ok(NddrReport {
        m_below_n,
        lambda_n_below_lambda_m,
        sampled: samples,
        sampled_compatible_with_m: ok,
    })
}

/// `tr_in[(A ⊗ I) J]`.
fn contract_input(a: &Hermitian, j: &Hermitian, din: usize, dout: usize) -> Hermitian {
    let mut out = Matrix::zeros(dout, dout);
    for o in 0..dout {
        for p in 0..dout {
            let mut s = czero();
            for i in 0..din {
                for k in 0..din {
                    s += a.as_matrix()[(i, k)] * j.as_matrix()[(k * dout + o, i * dout + p)];
                }
            }
            out[(o, p)] = s;
        }
    }
    Hermitian::symmetrized(&out)
}

/// For rank-one `M`, checks `Choi(C) = Σ_x M(x)ᵀ ⊗ ξ_x` with states `ξ_x`,
/// solving for `ξ_x` by least squares.
pub fn rank1_channel_form_check(m: &Observable, c: &Channel) -> Result<bool> {
    if m.dim() != c.in_dim() {
        return Err(Error::DimensionMismatch("observable and channel act on different inputs".into()));
    }
    let (din, dout) = (c.in_dim(), c.out_dim());
    let nonzero: Vec<usize> = (0..m.num_outcomes())
        .filter(|&x| m.effect(x).real_trace() > 1e-12)
        .collect();
    for &x in &nonzero {
        let e = eig_hermitian(m.effect(x))?;
        let top = *e.eigenvalues().last().expect("dim >= 1");
        if e.eigenvalues().iter().filter(|&&l| l > 1e-9 * top.max(1.0)).count() != 1 {
            return Err(Error::Precondition(format!("effect {x} is not rank one")));
        }
    }
    let ts: Vec<Hermitian> = nonzero.iter().map(|&x| m.effect(x).transpose()).collect();
    let k = ts.len();
    // Normal equations G ξ = R with G_xy = tr(T_x T_y), solved by pseudo-inverse.
    let g = Matrix::from_fn(k, k, |a, b| cx(ts[a].inner(&ts[b]), 0.0));
    let ge = eig_hermitian(&Hermitian::symmetrized(&g))?;
    let top = ge.eigenvalues().last().copied().unwrap_or(1.0);
    let pinv = ge.reconstruct_with(|l| if l > 1e-12 * top { 1.0 / l } else { 0.0 });
    let rhs: Vec<Hermitian> = ts.iter().map(|t| contract_input(t, c.choi(), din, dout)).collect();
    let xis: Vec<Hermitian> = (0..k)
        .map(|a| {
            let mut acc = Hermitian::zeros(dout);
            for (b, r) in rhs.iter().enumerate() {
                acc = &acc + &r.scale(pinv.as_matrix()[(a, b)].re);
            }
            acc
        })
        .collect();
    let mut recon = Hermitian::zeros(din * dout);
    for (t, xi) in ts.iter().zip(&xis) {
        recon = &recon + &t.kron(xi);
    }
    if recon.max_diff(c.choi()) > 1e-7 {
        return Ok(false);
    }
    for xi in &xis {
        if xi.min_eigenvalue()? < -1e-7 || (xi.real_trace() - 1.0).abs() > 1e-7 {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug)]
pub enum SequentialOutcome {
    /// Observable `N″` on the output of `Λ_M` with `Λ_M*(N″(y)) = N(y)`.
    Recovered(Observable),
    NotRecovered(Status),
}

impl SequentialOutcome {
    pub fn is_recovered(&self) -> bool {
        matches!(self, SequentialOutcome::Recovered(_))
    }
}

/// Measures `N` after the least disturbing channel of `M`.
pub fn sequential_recover(m: &Observable, n: &Observable, tol: &Tolerances) -> Result<SequentialOutcome> {
    if m.dim() != n.dim() {
        return Err(Error::DimensionMismatch("observables act on different spaces".into()));
    }
    let lm = least_disturbing_channel(m)?;
    let big = lm.out_dim();
    let dual = LinearMap::from_fn(big, m.dim(), |h| lm.dual(h))?;
    let mut p = SdpProblem::new();
    let blocks: Vec<BlockId> = (0..n.num_outcomes()).map(|_| p.add_psd(big, big as f64)).collect();
    p.add_matrix_equality(
        blocks.iter().map(|&b| (b, LinearMap::scaled_identity(big, 1.0))).collect(),
        &Hermitian::identity(big),
    )?;
    for (y, &b) in blocks.iter().enumerate() {
        p.add_matrix_equality(vec![(b, dual.clone())], n.effect(y))?;
    }
    let v = solve_feasibility(&p, tol)?;
    if !v.is_feasible() {
        return Ok(SequentialOutcome::NotRecovered(v.status));
    }
    let effects = blocks.iter().map(|&b| v.psd(b).expect("witness").clone()).collect();
    Ok(SequentialOutcome::Recovered(Observable::with_tolerance(effects, tol.verify())?))
}

/// `channel_division(C, Λ_M)`, the order-theoretic side of compatibility.
pub fn below_least_disturbing(m: &Observable, c: &Channel, tol: &Tolerances) -> Result<DivisionOutcome> {
    channel_division(c, &least_disturbing_channel(m)?, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::devices::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn trivial_observable_with_any_channel() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = random_channel(2, 2, 2, &mut rng).unwrap();
        let t = TrivialObservable::new(2, vec![0.3, 0.7]).unwrap().to_observable();
        let v = check_obs_channel(&t, &c, &tol()).unwrap();
        assert!(v.is_feasible());
        let inst = Instrument::scaled_channel(&c, &[0.3, 0.7]).unwrap();
        assert!(inst.induced_observable().unwrap().effect(0).max_diff(t.effect(0)) < 1e-12);
    }

    #[test]
    fn any_observable_with_depolarizing() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = random_povm(2, 3, &mut rng).unwrap();
        let xi = random_state(2, &mut rng);
        let dep = Channel::depolarizing_to(&xi, 2);
        assert!(check_obs_channel(&m, &dep, &tol()).unwrap().is_feasible());
        let states = vec![xi.clone(), xi.clone(), xi];
        let mp = Instrument::measure_prepare(&m, &states).unwrap();
        assert!(mp.total_channel().unwrap().choi_distance(&dep) < 1e-12);
    }

    #[test]
    fn identity_channel_rejects_nontrivial_observables() {
        let (_, _, z) = mub_qubit();
        assert!(check_obs_channel(&z, &Channel::identity(2), &tol()).unwrap().status().is_infeasible());
    }

    #[test]
    fn luders_examples() {
        let (x, _, z) = mub_qubit();
        let l = luders_instrument(&z).unwrap();
        let total = l.total_channel().unwrap();
        let d = Hermitian::from_real_diagonal(&[0.2, 0.8]);
        assert!(total.apply_operator(&d).unwrap().max_diff(&d) < 1e-14);
        let out = total.apply_operator(x.effect(0)).unwrap();
        assert!(out.max_diff(&Hermitian::identity(2).scale(0.5)) < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_povm(2, 3, &mut rng).unwrap();
        let l = luders_instrument(&m).unwrap();
        for _ in 0..3 {
            let rho = random_state(2, &mut rng);
            for x in 0..3 {
                let p = l.apply_operation(x, rho.rho()).unwrap().real_trace();
                assert!((p - rho.expectation(m.effect(x))).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn least_disturbing_channel_is_compatible() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..3 {
            let m = random_povm(2, 2, &mut rng).unwrap();
            let l = least_disturbing_channel(&m).unwrap();
            assert_eq!(l.out_dim(), 4);
            assert!(check_obs_channel(&m, &l, &tol()).unwrap().is_feasible());
        }
    }

    #[test]
    fn least_disturbing_of_sharp_matches_luders() {
        let (_, _, z) = mub_qubit();
        let l = least_disturbing_channel(&z).unwrap();
        let luders = luders_instrument(&z).unwrap().total_channel().unwrap();
        assert!(channel_division(&luders, &l, &tol()).unwrap().is_below());
    }

    #[test]
    fn least_disturbing_of_trivial_recovers_identity() {
        let t = TrivialObservable::uniform(2, 2).to_observable();
        let l = least_disturbing_channel(&t).unwrap();
        assert!(channel_division(&Channel::identity(2), &l, &tol()).unwrap().is_below());
    }

    #[test]
    fn nddr_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (x, _, z) = mub_qubit();
        let noisy = mix_with_trivial(&z, 0.5, &TrivialObservable::uniform(2, 2)).unwrap();
        let r = nddr_test(&noisy, &z, 3, &mut rng, &tol()).unwrap();
        assert!(r.m_below_n && r.lambda_n_below_lambda_m && r.consistent());
        let r = nddr_test(&z, &z, 2, &mut rng, &tol()).unwrap();
        assert!(r.m_below_n && r.consistent());
        let r = nddr_test(&x, &z, 0, &mut rng, &tol()).unwrap();
        assert!(!r.m_below_n && !r.lambda_n_below_lambda_m);
    }

    #[test]
    fn rank_one_form() {
        let (x, _, _) = mub_qubit();
        let states = [State::basis(2, 0), State::basis(2, 1)];
        let c = Instrument::measure_prepare(&x, &states).unwrap().total_channel().unwrap();
        assert!(rank1_channel_form_check(&x, &c).unwrap());
        let (_, _, z) = mub_qubit();
        let noisy = mix_with_trivial(&z, 0.5, &TrivialObservable::uniform(2, 2)).unwrap();
        assert!(matches!(rank1_channel_form_check(&noisy, &c), Err(Error::Precondition(_))));
        assert!(!rank1_channel_form_check(&x, &Channel::identity(2)).unwrap());
    }

    #[test]
    fn sequential_recovery() {
        let (_, _, z) = mub_qubit();
        let noisy = mix_with_trivial(&z, 0.5, &TrivialObservable::uniform(2, 2)).unwrap();
        assert!(sequential_recover(&z, &noisy, &tol()).unwrap().is_recovered());
        let (x, _, _) = mub_qubit();
        assert!(!sequential_recover(&z, &x, &tol()).unwrap().is_recovered());
    }
}
