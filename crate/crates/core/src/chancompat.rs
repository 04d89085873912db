//! Channel compatibility, channel division, robustness, and the tripartite
//! state marginal problem.

use crate::devices::{compose_choi, conjugate_channel, Channel, Observable, State};
use crate::error::{Error, Result};
use crate::linalg::{partial_trace_multi, HermitianMatrix};
use crate::sdp::{bisect_max, solve_feasibility, BlockId, LinearMap, SdpProblem, Status, Verdict};
use crate::{Hermitian, Tolerances};

/// Largest joint Choi dimension `in·d_A·d_B` accepted.
pub const JOINT_CHOI_DIM_CAP: usize = 64;

/// Map `X ↦ tr_{others}(X)` keeping the listed factors.
fn trace_map(dims: &[usize], keep: &[usize]) -> Result<LinearMap> {
    let n: usize = dims.iter().product();
    let out: usize = keep.iter().map(|&k| dims[k]).product();
    LinearMap::from_fn(n, out, |h| partial_trace_multi(h, dims, keep))
}

/// Map `ξ ↦ I_in ⊗ ξ`.
fn identity_tensor_map(din: usize, d: usize) -> Result<LinearMap> {
    let id = Hermitian::identity(din);
    LinearMap::from_fn(d, din * d, |h| Ok(id.kron(h)))
}

fn ident(d: usize) -> LinearMap {
    LinearMap::scaled_identity(d, 1.0)
}

/// Adds a Choi block for a channel `din → dout` with `tr_out J = I`.
fn add_channel_block(p: &mut SdpProblem, din: usize, dout: usize) -> Result<BlockId> {
    let j = p.add_psd(din * dout, din as f64);
    p.add_matrix_equality(vec![(j, trace_map(&[din, dout], &[0])?)], &Hermitian::identity(din))?;
    Ok(j)
}

fn check_pair_dims(ca: &Channel, cb: &Channel) -> Result<usize> {
    if ca.in_dim() != cb.in_dim() {
        return Err(Error::DimensionMismatch("channels have different inputs".into()));
    }
    let n = ca.in_dim() * ca.out_dim() * cb.out_dim();
    if n > JOINT_CHOI_DIM_CAP {
        return Err(Error::CapExceeded {
            what: "joint Choi dimension".into(),
            count: n,
            cap: JOINT_CHOI_DIM_CAP,
        });
    }
    Ok(n)
}

#[derive(Clone, Debug)]
pub struct ChannelPairVerdict {
    pub verdict: Verdict,
    /// Joint channel `in → A ⊗ B` when feasible.
    pub joint: Option<Channel>,
}

impl ChannelPairVerdict {
    pub fn status(&self) -> Status {
        self.verdict.status
    }

    pub fn is_feasible(&self) -> bool {
        self.verdict.is_feasible()
    }
}

/// Existence of a channel `in → A ⊗ B` with marginals `C_A` and `C_B`.
pub fn check_channel_pair(ca: &Channel, cb: &Channel, tol: &Tolerances) -> Result<ChannelPairVerdict> {
    check_pair_dims(ca, cb)?;
    let (din, da, db) = (ca.in_dim(), ca.out_dim(), cb.out_dim());
    let dims = [din, da, db];
    let mut p = SdpProblem::new();
    let j = p.add_psd(din * da * db, din as f64);
    p.add_matrix_equality(vec![(j, trace_map(&dims, &[0, 1])?)], ca.choi())?;
    p.add_matrix_equality(vec![(j, trace_map(&dims, &[0, 2])?)], cb.choi())?;
    let verdict = solve_feasibility(&p, tol)?;
    let joint = match verdict.psd(j) {
        Some(h) if verdict.is_feasible() => {
            let c = Channel::from_choi_with_tolerance(h.clone(), din, da * db, tol.verify())?;
            let defect = marginal_choi(c.choi(), &dims, &[0, 1])?
                .max_diff(ca.choi())
                .max(marginal_choi(c.choi(), &dims, &[0, 2])?.max_diff(cb.choi()));
            if defect > 1e-8 {
                return Err(Error::Solver(format!("joint channel marginals off by {defect:e}")));
            }
            Some(c)
        }
        _ => None,
    };
    Ok(ChannelPairVerdict { verdict, joint })
}

fn marginal_choi(j: &Hermitian, dims: &[usize], keep: &[usize]) -> Result<Hermitian> {
    partial_trace_multi(j, dims, keep)
}

/// Joint channel `ρ ↦ C_A(ρ) ⊗ ξ` for a constant `C_B`.
pub fn product_with_state(ca: &Channel, xi: &State) -> Result<Channel> {
    let kraus = ca
        .kraus()
        .iter()
        .flat_map(|k| {
            let e = crate::linalg::eig_hermitian(xi.rho()).expect("state spectrum");
            (0..xi.dim())
                .filter(|&i| e.eigenvalues()[i] > 1e-14)
                .map(|i| {
                    let v = crate::Matrix::column(&e.eigenvector(i)).scale(e.eigenvalues()[i].sqrt());
                    k.kron(&v)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    Channel::from_kraus(kraus)
}

/// States are simultaneously diagonalizable (pairwise commuting to `1e-10`).
pub fn broadcastable_states(states: &[State]) -> Result<bool> {
    for (i, a) in states.iter().enumerate() {
        for b in &states[i + 1..] {
            if a.dim() != b.dim() {
                return Err(Error::DimensionMismatch("states of different dimensions".into()));
            }
            if a.rho().commutator(b.rho())?.op_norm()? > 1e-10 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Debug)]
pub enum DivisionOutcome {
    /// `C = E ∘ Λ` with the witness `E`.
    Below(Channel),
    NotBelow(Status),
}

impl DivisionOutcome {
    pub fn is_below(&self) -> bool {
        matches!(self, DivisionOutcome::Below(_))
    }
}

/// Searches a channel `E` with `C = E ∘ Λ`.
pub fn channel_division(c: &Channel, lambda: &Channel, tol: &Tolerances) -> Result<DivisionOutcome> {
    if c.in_dim() != lambda.in_dim() {
        return Err(Error::DimensionMismatch("channels have different inputs".into()));
    }
    let (din, dmid, dout) = (c.in_dim(), lambda.out_dim(), c.out_dim());
    let mut p = SdpProblem::new();
    let e = add_channel_block(&mut p, dmid, dout)?;
    let lam_choi = lambda.choi().clone();
    let compose = LinearMap::from_fn(dmid * dout, din * dout, |h| compose_choi(&lam_choi, h, din, dmid, dout))?;
    p.add_matrix_equality(vec![(e, compose)], c.choi())?;
    let v = solve_feasibility(&p, tol)?;
    if !v.is_feasible() {
        return Ok(DivisionOutcome::NotBelow(v.status));
    }
    let j = v.psd(e).expect("witness").clone();
    let witness = Channel::from_choi_with_tolerance(j, dmid, dout, tol.verify())?;
    Ok(DivisionOutcome::Below(witness))
}

/// Compatibility through the conjugate-channel order: `C_2 ⪯ C_1^c`.
pub fn conjugate_compat_check(c1: &Channel, c2: &Channel, tol: &Tolerances) -> Result<bool> {
    let conj = conjugate_channel(c1)?;
    Ok(channel_division(c2, &conj, tol)?.is_below())
}

/// Noise class admitted in a robustness query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseClass {
    /// Trivial devices: constant channels and coin-toss observables.
    TrivialNoise,
    /// Any compatible pair; its joint device is a solver variable.
    CompatibleNoise,
    /// Arbitrary devices.
    ArbitraryNoise,
}

/// Devices whose robustness is measured.
#[derive(Clone, Debug)]
pub enum DevicePair {
    Channels(Channel, Channel),
    ObservableChannel(Observable, Channel),
}

fn channel_pair_probe(ca: &Channel, cb: &Channel, class: NoiseClass, lam: f64) -> Result<SdpProblem> {
    check_pair_dims(ca, cb)?;
    let (din, da, db) = (ca.in_dim(), ca.out_dim(), cb.out_dim());
    let dims = [din, da, db];
    let w = -(1.0 - lam);
    let mut p = SdpProblem::new();
    let j = p.add_psd(din * da * db, din as f64);
    let tr_b = trace_map(&dims, &[0, 1])?;
    let tr_a = trace_map(&dims, &[0, 2])?;
    let mut terms_a = vec![(j, tr_b.clone())];
    let mut terms_b = vec![(j, tr_a.clone())];
    match class {
        NoiseClass::TrivialNoise => {
            let xa = p.add_psd(da, 1.0);
            let xb = p.add_psd(db, 1.0);
            p.add_constraint(vec![(xa, trace_functional(da))], 1.0)?;
            p.add_constraint(vec![(xb, trace_functional(db))], 1.0)?;
            terms_a.push((xa, identity_tensor_map(din, da)?.scaled(w)));
            terms_b.push((xb, identity_tensor_map(din, db)?.scaled(w)));
        }
        NoiseClass::CompatibleNoise => {
            let k = p.add_psd(din * da * db, din as f64);
            p.add_matrix_equality(vec![(k, trace_map(&dims, &[0])?)], &Hermitian::identity(din))?;
            terms_a.push((k, tr_b.scaled(w)));
            terms_b.push((k, tr_a.scaled(w)));
        }
        NoiseClass::ArbitraryNoise => {
            let ya = add_channel_block(&mut p, din, da)?;
            let yb = add_channel_block(&mut p, din, db)?;
            terms_a.push((ya, ident(din * da).scaled(w)));
            terms_b.push((yb, ident(din * db).scaled(w)));
        }
    }
    p.add_matrix_equality(terms_a, &ca.choi().scale(lam))?;
    p.add_matrix_equality(terms_b, &cb.choi().scale(lam))?;
    Ok(p)
}

fn trace_functional(d: usize) -> Vec<f64> {
    let mut v = vec![0.0; d * d];
    for x in v.iter_mut().take(d) {
        *x = 1.0;
    }
    v
}

fn obs_channel_probe(m: &Observable, c: &Channel, class: NoiseClass, lam: f64) -> Result<SdpProblem> {
    if m.dim() != c.in_dim() {
        return Err(Error::DimensionMismatch("observable and channel act on different inputs".into()));
    }
    let (din, dout, k) = (c.in_dim(), c.out_dim(), m.num_outcomes());
    let w = -(1.0 - lam);
    let mut p = SdpProblem::new();
    let ops: Vec<BlockId> = (0..k).map(|_| p.add_psd(din * dout, din as f64)).collect();
    let tr_out = trace_map(&[din, dout], &[0])?;
    let mut sum_terms: Vec<(BlockId, LinearMap)> = ops.iter().map(|&b| (b, ident(din * dout))).collect();
    let mut marg_terms: Vec<Vec<(BlockId, LinearMap)>> =
        ops.iter().map(|&b| vec![(b, tr_out.clone())]).collect();
    let id_in = Hermitian::identity(din);
    match class {
        NoiseClass::TrivialNoise => {
            let xi = p.add_psd(dout, 1.0);
            p.add_constraint(vec![(xi, trace_functional(dout))], 1.0)?;
            sum_terms.push((xi, identity_tensor_map(din, dout)?.scaled(w)));
            let probs: Vec<BlockId> = (0..k).map(|_| p.add_scalar(1.0)).collect();
            p.add_constraint(probs.iter().map(|&b| (b, vec![1.0])).collect(), 1.0)?;
            for (x, t) in marg_terms.iter_mut().enumerate() {
                t.push((probs[x], LinearMap::scalar_times(&id_in.scale(w))));
            }
        }
        NoiseClass::CompatibleNoise => {
            let noise: Vec<BlockId> = (0..k).map(|_| p.add_psd(din * dout, din as f64)).collect();
            p.add_matrix_equality(noise.iter().map(|&b| (b, tr_out.clone())).collect(), &id_in)?;
            for &b in &noise {
                sum_terms.push((b, ident(din * dout).scaled(w)));
            }
            for (t, &b) in marg_terms.iter_mut().zip(&noise) {
                t.push((b, tr_out.clone().scaled(w)));
            }
        }
        NoiseClass::ArbitraryNoise => {
            let yc = add_channel_block(&mut p, din, dout)?;
            sum_terms.push((yc, ident(din * dout).scaled(w)));
            // Transposed noise effects, summing to the identity.
            let ym: Vec<BlockId> = (0..k).map(|_| p.add_psd(din, din as f64)).collect();
            p.add_matrix_equality(ym.iter().map(|&b| (b, ident(din))).collect(), &id_in)?;
            for (t, &b) in marg_terms.iter_mut().zip(&ym) {
                t.push((b, ident(din).scaled(w)));
            }
        }
    }
    p.add_matrix_equality(sum_terms, &c.choi().scale(lam))?;
    for (x, t) in marg_terms.into_iter().enumerate() {
        p.add_matrix_equality(t, &m.effect(x).transpose().scale(lam))?;
    }
    Ok(p)
}

/// One robustness probe: are the mixtures at weight `lam` compatible for
/// some noise of the given class?
pub fn robustness_probe(pair: &DevicePair, class: NoiseClass, lam: f64, tol: &Tolerances) -> Result<Verdict> {
    let p = match pair {
        DevicePair::Channels(a, b) => channel_pair_probe(a, b, class, lam)?,
        DevicePair::ObservableChannel(m, c) => obs_channel_probe(m, c, class, lam)?,
    };
    solve_feasibility(&p, tol)
}

/// Largest weight `λ` for which `λX_j + (1−λ)Y_j` is compatible for some
/// noise pair of the given class; bisection from the feasible side.
pub fn robustness(pair: &DevicePair, class: NoiseClass, tol: &Tolerances) -> Result<f64> {
    Ok(bisect_max(|lam| Ok(robustness_probe(pair, class, lam, tol)?.is_feasible()), tol.bisect)?.value)
}

/// Existence of `ω` on `A⊗B⊗C` with `tr_C ω = ρ_AB` and `tr_A ω = ρ_BC`.
pub fn state_marginal_feasible(
    rho_ab: &HermitianMatrix,
    rho_bc: &HermitianMatrix,
    dims: (usize, usize, usize),
    pure_required: bool,
    tol: &Tolerances,
) -> Result<Verdict> {
    if pure_required {
        return Err(Error::Unsupported("pure joint states make the problem nonconvex".into()));
    }
    let (da, db, dc) = dims;
    if rho_ab.dim() != da * db || rho_bc.dim() != db * dc {
        return Err(Error::DimensionMismatch("marginal dimensions".into()));
    }
    State::with_tolerance(rho_ab.clone(), 1e-8)?;
    State::with_tolerance(rho_bc.clone(), 1e-8)?;
    let full = [da, db, dc];
    let mut p = SdpProblem::new();
    let w = p.add_psd(da * db * dc, 1.0);
    p.add_constraint(vec![(w, trace_functional(da * db * dc))], 1.0)?;
    p.add_matrix_equality(vec![(w, trace_map(&full, &[0, 1])?)], rho_ab)?;
    p.add_matrix_equality(vec![(w, trace_map(&full, &[1, 2])?)], rho_bc)?;
    solve_feasibility(&p, tol)
}
