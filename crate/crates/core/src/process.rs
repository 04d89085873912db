//! Process observables (testers) acting on channels through their Choi matrix.
//!
//! Probabilities are `p_j = tr[J(Φ) T_j]` with `tr_out J = I`, so a tester
//! normalized to `ξ ⊗ I` with `tr ξ = 1` yields a distribution. For a trace-one
//! Choi state `ω = J/d` this reads `p_j = d·tr[ω T_j]`.

use crate::devices::{Channel, Observable, State};
use crate::error::{invalid, Error, Result};
use crate::linalg::partial_trace_multi;
use crate::sdp::{bisect_max, solve_feasibility, BisectOutcome, BlockId, LinearMap, SdpProblem, Status, Verdict};
use crate::{Hermitian, Tolerances};

/// Cap on the product outcome count of a tester pair.
pub const TESTER_PAIR_CAP: usize = 256;

#[derive(Clone, Debug, PartialEq)]
pub struct Tester {
    in_dim: usize,
    out_dim: usize,
    effects: Vec<Hermitian>,
    xi: State,
}

impl Tester {
    pub fn new(effects: Vec<Hermitian>, in_dim: usize, out_dim: usize) -> Result<Self> {
        Self::with_tolerance(effects, in_dim, out_dim, 1e-10)
    }

    pub fn with_tolerance(effects: Vec<Hermitian>, in_dim: usize, out_dim: usize, tol: f64) -> Result<Self> {
        let n = in_dim * out_dim;
        if effects.is_empty() {
            return Err(invalid("tester", "no effects"));
        }
        for (j, e) in effects.iter().enumerate() {
            if e.dim() != n {
                return Err(invalid("tester", format!("effect {j} has dim {}, expected {n}", e.dim())));
            }
            let lo = e.min_eigenvalue()?;
            if lo < -tol {
                return Err(invalid("tester", format!("effect {j} has eigenvalue {lo:e}")));
            }
        }
        let total = Hermitian::sum_of(&effects, n);
        let xi_rho = partial_trace_multi(&total, &[in_dim, out_dim], &[0])?.scale(1.0 / out_dim as f64);
        let defect = total.max_diff(&xi_rho.kron(&Hermitian::identity(out_dim)));
        if defect > tol {
            return Err(invalid("tester", format!("effects sum differs from ξ⊗I by {defect:e}")));
        }
        let xi = State::with_tolerance(xi_rho, tol).map_err(|_| invalid("tester", "normalization is not a state"))?;
        Ok(Self {
            in_dim,
            out_dim,
            effects,
            xi,
        })
    }

    /// Prepares `probe` and measures `m` on the output: effects `probeᵀ ⊗ M(x)`.
    pub fn probe_measure(probe: &State, m: &Observable) -> Result<Self> {
        let pt = probe.rho().transpose();
        let effects = m.effects().iter().map(|e| pt.kron(e)).collect();
        Self::new(effects, probe.dim(), m.dim())
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn effects(&self) -> &[Hermitian] {
        &self.effects
    }

    pub fn num_outcomes(&self) -> usize {
        self.effects.len()
    }

    pub fn normalization_state(&self) -> &State {
        &self.xi
    }

    /// `q T + (1−q) D`.
    pub fn mix(&self, q: f64, trivial: &TrivialTester) -> Result<Self> {
        if trivial.components.len() != self.effects.len() || trivial.in_dim() != self.in_dim {
            return Err(Error::DimensionMismatch("trivial tester shape".into()));
        }
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidArgument(format!("weight {q} outside [0, 1]")));
        }
        let id = Hermitian::identity(self.out_dim);
        let effects = self
            .effects
            .iter()
            .zip(&trivial.components)
            .map(|(e, a)| &e.scale(q) + &a.kron(&id).scale(1.0 - q))
            .collect();
        Self::with_tolerance(effects, self.in_dim, self.out_dim, 1e-9)
    }
}

/// Effects `A_j ⊗ I` with `A_j ⪰ 0` and `Σ tr A_j = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrivialTester {
    components: Vec<Hermitian>,
}

impl TrivialTester {
    pub fn new(components: Vec<Hermitian>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(invalid("trivial tester", "no components"));
        };
        let d = first.dim();
        let mut total = 0.0;
        for (j, a) in components.iter().enumerate() {
            if a.dim() != d {
                return Err(invalid("trivial tester", format!("component {j} has dim {}", a.dim())));
            }
            if a.min_eigenvalue()? < -1e-10 {
                return Err(invalid("trivial tester", format!("component {j} is not PSD")));
            }
            total += a.real_trace();
        }
        if (total - 1.0).abs() > 1e-10 {
            return Err(invalid("trivial tester", format!("total trace {total}")));
        }
        Ok(Self { components })
    }

    /// `A_j = p_j ξ`.
    pub fn from_distribution(xi: &State, p: &[f64]) -> Result<Self> {
        Self::new(p.iter().map(|&w| xi.rho().scale(w)).collect())
    }

    pub fn in_dim(&self) -> usize {
        self.components[0].dim()
    }

    pub fn components(&self) -> &[Hermitian] {
        &self.components
    }

    /// Outcome distribution `tr A_j`, the same on every channel.
    pub fn probabilities(&self) -> Vec<f64> {
        self.components.iter().map(|a| a.real_trace()).collect()
    }

    pub fn to_tester(&self, out_dim: usize) -> Result<Tester> {
        let id = Hermitian::identity(out_dim);
        let effects = self.components.iter().map(|a| a.kron(&id)).collect();
        Tester::with_tolerance(effects, self.in_dim(), out_dim, 1e-9)
    }
}

/// `p_j = tr[J(C) T_j]`.
pub fn tester_probability(t: &Tester, c: &Channel) -> Result<Vec<f64>> {
    if c.in_dim() != t.in_dim || c.out_dim() != t.out_dim {
        return Err(Error::DimensionMismatch("tester and channel dimensions differ".into()));
    }
    Ok(t.effects.iter().map(|e| e.inner(c.choi())).collect())
}

fn check_pair_shape(tm: &Tester, tn: &Tester) -> Result<()> {
    if tm.in_dim != tn.in_dim || tm.out_dim != tn.out_dim {
        return Err(Error::DimensionMismatch("testers act on different channel spaces".into()));
    }
    let count = tm.num_outcomes() * tn.num_outcomes();
    if count > TESTER_PAIR_CAP {
        return Err(Error::CapExceeded {
            what: "product outcomes of a tester pair".into(),
            count,
            cap: TESTER_PAIR_CAP,
        });
    }
    Ok(())
}

struct PairProblem {
    problem: SdpProblem,
    joint: Vec<Vec<BlockId>>,
}

/// Marginals `q M_j + (1−q) A_j ⊗ I` and `q N_l + (1−q) B_l ⊗ I`; the noise
/// terms vanish at `q = 1`.
fn pair_problem(tm: &Tester, tn: &Tester, q: f64) -> Result<PairProblem> {
    let (din, dout) = (tm.in_dim, tm.out_dim);
    let n = din * dout;
    let mut p = SdpProblem::new();
    let joint: Vec<Vec<BlockId>> = (0..tm.num_outcomes())
        .map(|_| (0..tn.num_outcomes()).map(|_| p.add_psd(n, dout as f64)).collect())
        .collect();
    let id = LinearMap::scaled_identity(n, 1.0);
    let noise = q < 1.0;
    let embed = if noise {
        Some(LinearMap::from_fn(din, n, |a| Ok(a.kron(&Hermitian::identity(dout))))?.scaled(-(1.0 - q)))
    } else {
        None
    };
    let mut trace = vec![0.0; din * din];
    trace[..din].iter_mut().for_each(|v| *v = 1.0);
    let add_noise = |p: &mut SdpProblem, count: usize| -> Result<Vec<BlockId>> {
        let ids: Vec<BlockId> = (0..count).map(|_| p.add_psd(din, 1.0)).collect();
        p.add_constraint(ids.iter().map(|&b| (b, trace.clone())).collect(), 1.0)?;
        Ok(ids)
    };
    let (a_ids, b_ids) = if noise {
        (add_noise(&mut p, tm.num_outcomes())?, add_noise(&mut p, tn.num_outcomes())?)
    } else {
        (Vec::new(), Vec::new())
    };
    for (j, m) in tm.effects.iter().enumerate() {
        let mut terms: Vec<(BlockId, LinearMap)> = joint[j].iter().map(|&b| (b, id.clone())).collect();
        if let Some(e) = &embed {
            terms.push((a_ids[j], e.clone()));
        }
        p.add_matrix_equality(terms, &m.scale(q))?;
    }
    for (l, nl) in tn.effects.iter().enumerate() {
        let mut terms: Vec<(BlockId, LinearMap)> = joint.iter().map(|row| (row[l], id.clone())).collect();
        if let Some(e) = &embed {
            terms.push((b_ids[l], e.clone()));
        }
        p.add_matrix_equality(terms, &nl.scale(q))?;
    }
    Ok(PairProblem { problem: p, joint })
}

#[derive(Clone, Debug)]
pub struct TesterPairVerdict {
    pub verdict: Verdict,
    /// Joint tester `G_{jl}`, indexed `j·|N| + l`.
    pub joint: Option<Tester>,
}

impl TesterPairVerdict {
    pub fn status(&self) -> Status {
        self.verdict.status
    }

    pub fn is_feasible(&self) -> bool {
        self.verdict.is_feasible()
    }
}

/// Existence of `G_{jl} ⪰ 0` with `Σ_l G_{jl} = M_j` and `Σ_j G_{jl} = N_l`.
pub fn check_tester_pair(tm: &Tester, tn: &Tester, tol: &Tolerances) -> Result<TesterPairVerdict> {
    check_pair_shape(tm, tn)?;
    let pp = pair_problem(tm, tn, 1.0)?;
    let verdict = solve_feasibility(&pp.problem, tol)?;
    if !verdict.is_feasible() {
        return Ok(TesterPairVerdict { verdict, joint: None });
    }
    let g: Vec<Vec<Hermitian>> = pp
        .joint
        .iter()
        .map(|row| row.iter().map(|&b| verdict.psd(b).expect("witness").clone()).collect())
        .collect();
    let n = tm.in_dim * tm.out_dim;
    let mut worst: f64 = 0.0;
    for (j, m) in tm.effects.iter().enumerate() {
        worst = worst.max(Hermitian::sum_of(&g[j], n).max_diff(m));
    }
    for (l, nl) in tn.effects.iter().enumerate() {
        worst = worst.max(Hermitian::sum_of(g.iter().map(|row| &row[l]), n).max_diff(nl));
    }
    if worst > 1e-8 {
        return Err(Error::Solver(format!("joint tester marginal defect {worst:.2e}")));
    }
    let joint = Tester::with_tolerance(g.into_iter().flatten().collect(), tm.in_dim, tm.out_dim, tol.verify())?;
    Ok(TesterPairVerdict {
        verdict,
        joint: Some(joint),
    })
}

/// Largest `q` at which the pair, each mixed with an optimized trivial tester,
/// is compatible.
pub fn tester_degree(tm: &Tester, tn: &Tester, tol: &Tolerances) -> Result<BisectOutcome> {
    check_pair_shape(tm, tn)?;
    bisect_max(
        |q| Ok(solve_feasibility(&pair_problem(tm, tn, q)?.problem, tol)?.is_feasible()),
        tol.bisect,
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct CommutationReport {
    /// `‖[M_j, N_l]‖`, row `j`, column `l`.
    pub commutators: Vec<Vec<f64>>,
    pub max_commutator: f64,
    pub status: Status,
}

impl CommutationReport {
    pub fn commuting(&self, tol: f64) -> bool {
        self.max_commutator < tol
    }
}

/// Effect commutators alongside the compatibility verdict.
pub fn commutation_vs_compat_report(tm: &Tester, tn: &Tester, tol: &Tolerances) -> Result<CommutationReport> {
    let mut commutators = Vec::with_capacity(tm.num_outcomes());
    let mut max_commutator: f64 = 0.0;
    for m in &tm.effects {
        let row = tn
            .effects
            .iter()
            .map(|n| m.commutator(n)?.op_norm())
            .collect::<Result<Vec<f64>>>()?;
        max_commutator = row.iter().fold(max_commutator, |a, &b| a.max(b));
        commutators.push(row);
    }
    let status = check_tester_pair(tm, tn, tol)?.status();
    Ok(CommutationReport {
        commutators,
        max_commutator,
        status,
    })
}

/// The orthogonal-probe pair: probe `|0⟩` or `|1⟩`, then measure `σ_z`.
pub fn orthogonal_probe_pair() -> (Tester, Tester) {
    let z = crate::devices::mub_qubit().2;
    (
        Tester::probe_measure(&State::basis(2, 0), &z).expect("valid"),
        Tester::probe_measure(&State::basis(2, 1), &z).expect("valid"),
    )
}
